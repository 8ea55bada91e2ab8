//! Exact geometric data of warped products `B x_f F` with metric `g_B + f^2 g_0`.
//!
//! Everything reduces to one base coordinate `t`: the fiber is homogeneous and
//! the warp depends on `t` only, so every curvature quantity is fiber-constant.

mod base;
mod fiber;
mod product;
mod warp;

pub use base::BaseSpec;
pub use fiber::{FiberEigenvalue, FiberSpec};
pub use product::{ComparisonConstants, CurvatureMode, MeanCurvature, WarpedProduct};
pub use warp::{WarpSpec, WarpValue};
