//! Small self-contained eigensolvers.
//!
//! * [`SymTridiagonal`]: symmetric tridiagonal matrices, optionally with the two
//!   corner entries of a periodic stencil. Eigenvalues by Sturm-count bisection,
//!   eigenvectors by inverse iteration.
//! * [`jacobi_eigen`]: cyclic Jacobi for small dense symmetric matrices.
//! * [`lanczos_shift_invert`]: Lanczos on an inverse operator supplied as a closure.

mod band;
pub(crate) use band::BandCholesky;
mod jacobi;
mod lanczos;
mod tridiag;

pub use jacobi::{jacobi_eigen, DenseEigen};
pub use lanczos::{lanczos_shift_invert, LanczosResult};
pub use tridiag::{Ldl, SymTridiagonal};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn scale(a: &mut [f64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

/// `a -= c * b`
pub(crate) fn axpy_neg(a: &mut [f64], c: f64, b: &[f64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
}
