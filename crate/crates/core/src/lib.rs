//! Spectral laboratory for warped products `B x_f F`.
//!
//! * [`model`]: curvature and mean-curvature data, comparison constants.
//! * [`sturm`]: finite-volume discretization of `-sigma (1/rho)(rho u')' + V u`.
//! * [`spectra`]: first eigenvalues, Perelman lambda constants, Dirac spectra of
//!   model spaces and the inequality reports built on them.
//! * [`oracle`]: a full two-dimensional discretization used to cross-check the
//!   separation of variables, plus the fiber-integration identity residual.
//! * [`config`] / [`run`]: configuration files and the report pipeline behind the CLI.

pub mod config;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod run;
pub mod spectra;
pub mod sturm;

pub use error::{Error, Result};
