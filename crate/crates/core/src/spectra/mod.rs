//! First eigenvalues, Perelman lambda constants, model Dirac spectra and the
//! comparison inequalities assembled from them.
//!
//! Every eigenproblem on a warped product separates: a fiber eigenfunction with
//! eigenvalue `mu_k` turns `-Delta^M` into the 1D operator
//! `-(1/rho)(rho u')' + mu_k / f^2` with `rho = w f^p`.

mod dirac;
mod eigen;
mod inequality;

pub use dirac::{dirac_first_eigenvalue, ModelSpace};
pub use eigen::{
    eigen_summary, f_functional, lambda1_base, lambda1_m, laplace_problem, perelman_lambda,
    perelman_problem, Channel, EigenSummary, Lambda1M, ModeEntry, PerelmanTarget, PerelmanValue,
};
pub use inequality::{
    model_perelman_lambda, verify_inequalities, InequalityName, InequalityReport, Verdict,
    VerifyTarget,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sturm::{assemble, eigen_smallest, SLProblem, SpectralResult};

/// Grid size, extrapolation switch and tolerance floor shared by all solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub n: usize,
    pub richardson: bool,
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            n: 512,
            richardson: true,
            tol: 1e-6,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n < 32 {
            return Err(Error::config(format!(
                "solver.n must be >= 32, got {}",
                self.n
            )));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::config(format!(
                "solver.tol must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// A computed value with an estimate of its discretization error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// The `count` smallest eigenvalues at the configured accuracy, with vectors
/// from the finest grid solved.
///
/// With Richardson: grids `n` and `2n`, value `(4 l_2n - l_n) / 3`. Without:
/// value from grid `n`, error `|l_n - l_{n/2}| / 3`.
pub(crate) fn solve(
    problem: &SLProblem,
    opts: &SolverOptions,
    count: usize,
) -> Result<(Vec<Estimate>, SpectralResult)> {
    opts.validate()?;
    let primary = eigen_smallest(&assemble(problem, opts.n)?, count)?;
    if opts.richardson {
        let fine = eigen_smallest(&assemble(problem, 2 * opts.n)?, count)?;
        let est = primary
            .values
            .iter()
            .zip(&fine.values)
            .map(|(a, b)| Estimate {
                value: (4.0 * b - a) / 3.0,
                error: (b - a).abs() / 3.0,
            })
            .collect();
        Ok((est, fine))
    } else {
        let coarse = eigen_smallest(&assemble(problem, opts.n / 2)?, count)?;
        let est = primary
            .values
            .iter()
            .zip(&coarse.values)
            .map(|(a, c)| Estimate {
                value: *a,
                error: (a - c).abs() / 3.0,
            })
            .collect();
        Ok((est, primary))
    }
}
