//! Finite-volume discretization of `-sigma (1/rho)(rho u')' + V u = lambda u`.
//!
//! Cells are centered at `t_i = (i + 1/2) h`, `h = L / n`. The flux through the
//! face `t_{i+1/2}` uses `rho` at the face. A periodic domain wraps the face at
//! `t = 0`; a natural-boundary domain has zero flux through both end faces, which
//! covers Neumann intervals and the poles of a sphere where `rho` vanishes.
//! With node weights `d_i = rho_i h` the symmetrized matrix `D^{1/2} A D^{-1/2}`
//! is tridiagonal, plus two corner entries when periodic.

use serde::Serialize;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::SymTridiagonal;

pub type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Periodic,
    Natural,
}

/// Self-adjoint 1D eigenproblem in the weighted space `L^2(rho dt)`.
#[derive(Clone)]
pub struct SLProblem {
    pub kind: DomainKind,
    pub length: f64,
    pub sigma: f64,
    pub density: Coefficient,
    pub potential: Coefficient,
}

impl fmt::Debug for SLProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SLProblem")
            .field("kind", &self.kind)
            .field("length", &self.length)
            .field("sigma", &self.sigma)
            .finish_non_exhaustive()
    }
}

impl SLProblem {
    pub fn new(
        kind: DomainKind,
        length: f64,
        sigma: f64,
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        potential: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::config(format!(
                "domain length must be positive, got {length}"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::config(format!(
                "diffusion scale must be positive, got {sigma}"
            )));
        }
        Ok(Self {
            kind,
            length,
            sigma,
            density: Arc::new(density),
            potential: Arc::new(potential),
        })
    }

    /// Same problem with `V + shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        let v = self.potential.clone();
        Self {
            potential: Arc::new(move |t| v(t) + shift),
            ..self.clone()
        }
    }
}

/// Assembled operator on one grid.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub n: usize,
    pub h: f64,
    pub kind: DomainKind,
    /// Cell centers.
    pub nodes: Vec<f64>,
    /// `rho_i h`, the discrete inner-product weights.
    pub weights: Vec<f64>,
    /// `sigma rho_{i+1/2} / h` for face `i + 1/2`; the last entry is the wrap
    /// face (periodic) or zero (natural).
    pub face_flux: Vec<f64>,
    pub potential: Vec<f64>,
    /// Symmetrized matrix.
    pub matrix: SymTridiagonal,
}

impl DiscreteOperator {
    /// Largest `|row sum|` of the unsymmetrized `V = 0` operator relative to its
    /// largest diagonal entry; zero up to rounding when constants are in the kernel.
    pub fn kernel_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..n {
            let left = if i > 0 {
                self.face_flux[i - 1]
            } else {
                self.wrap_flux()
            };
            let right = if i + 1 < n {
                self.face_flux[i]
            } else {
                self.wrap_flux()
            };
            let diag = (left + right) / self.weights[i];
            let sum = diag - left / self.weights[i] - right / self.weights[i];
            worst = worst.max(sum.abs());
            scale = scale.max(diag.abs());
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    fn wrap_flux(&self) -> f64 {
        self.face_flux[self.n - 1]
    }

    /// `max |S_ij - S_ji|` of the symmetrized operator rebuilt densely from the
    /// unsymmetrized one, relative to `max |S_ij|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            let left = if i > 0 {
                self.face_flux[i - 1]
            } else {
                self.wrap_flux()
            };
            let right = if i + 1 < n {
                self.face_flux[i]
            } else {
                self.wrap_flux()
            };
            a[i * n + i] += (left + right) / self.weights[i] + self.potential[i];
            let jl = if i > 0 { i - 1 } else { n - 1 };
            let jr = if i + 1 < n { i + 1 } else { 0 };
            a[i * n + jl] -= left / self.weights[i];
            a[i * n + jr] -= right / self.weights[i];
        }
        let sq: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let mut worst: f64 = 0.0;
        let mut big: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let sij = sq[i] * a[i * n + j] / sq[j];
                let sji = sq[j] * a[j * n + i] / sq[i];
                worst = worst.max((sij - sji).abs());
                big = big.max(sij.abs());
            }
        }
        worst / big
    }
}

/// Eigenpairs on one grid, or Richardson-extrapolated values from a grid ladder.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    /// Ascending eigenvalues (extrapolated when refined).
    pub values: Vec<f64>,
    /// Eigenfunctions on the finest grid used, unit discrete `rho`-norm, with the
    /// largest-magnitude entry positive.
    pub vectors: Vec<Vec<f64>>,
    pub nodes: Vec<f64>,
    pub n: usize,
    /// `|lambda_2n - lambda_n| / 3` per eigenvalue, when refined.
    pub error_estimate: Option<Vec<f64>>,
    /// `log2((lambda_n - lambda_2n) / (lambda_2n - lambda_4n))`, when measurable.
    pub observed_order: Option<Vec<Option<f64>>>,
    /// Set when some measurable order is below 1.5 (rough coefficients).
    pub low_order_warning: bool,
}

pub fn assemble(problem: &SLProblem, n: usize) -> Result<DiscreteOperator> {
    if n < 16 {
        return Err(Error::config(format!("grid size must be >= 16, got {n}")));
    }
    let h = problem.length / n as f64;
    let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let mut weights = Vec::with_capacity(n);
    let mut potential = Vec::with_capacity(n);
    for &t in &nodes {
        let rho = (problem.density)(t);
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::config(format!(
                "density must be positive inside the domain, got {rho} at t={t}"
            )));
        }
        let v = (problem.potential)(t);
        if !v.is_finite() {
            return Err(Error::config(format!("potential is not finite at t={t}")));
        }
        weights.push(rho * h);
        potential.push(v);
    }
    let mut face_flux = Vec::with_capacity(n);
    for i in 0..n - 1 {
        let t = (i + 1) as f64 * h;
        let rho = (problem.density)(t);
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::config(format!(
                "density must be positive inside the domain, got {rho} at face t={t}"
            )));
        }
        face_flux.push(problem.sigma * rho / h);
    }
    face_flux.push(match problem.kind {
        DomainKind::Periodic => problem.sigma * (problem.density)(0.0) / h,
        DomainKind::Natural => 0.0,
    });
    let wrap = face_flux[n - 1];
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 { face_flux[i - 1] } else { wrap };
            let right = if i + 1 < n { face_flux[i] } else { wrap };
            (left + right) / weights[i] + potential[i]
        })
        .collect();
    let off: Vec<f64> = (0..n - 1)
        .map(|i| -face_flux[i] / (weights[i] * weights[i + 1]).sqrt())
        .collect();
    let corner = match problem.kind {
        DomainKind::Periodic => Some(-wrap / (weights[0] * weights[n - 1]).sqrt()),
        DomainKind::Natural => None,
    };
    Ok(DiscreteOperator {
        n,
        h,
        kind: problem.kind,
        nodes,
        weights,
        face_flux,
        potential,
        matrix: SymTridiagonal::new(diag, off, corner),
    })
}

pub fn eigen_smallest(op: &DiscreteOperator, count: usize) -> Result<SpectralResult> {
    if count == 0 || count > op.n {
        return Err(Error::config(format!(
            "requested {count} eigenpairs from a grid of {}",
            op.n
        )));
    }
    let (values, sym_vectors) = op.matrix.smallest_eigenpairs(count)?;
    let vectors = sym_vectors
        .into_iter()
        .map(|y| {
            let mut u: Vec<f64> = y
                .iter()
                .zip(&op.weights)
                .map(|(yi, d)| yi / d.sqrt())
                .collect();
            let (mut big, mut at) = (0.0f64, 0);
            for (i, v) in u.iter().enumerate() {
                if v.abs() > big {
                    big = v.abs();
                    at = i;
                }
            }
            if u[at] < 0.0 {
                u.iter_mut().for_each(|v| *v = -*v);
            }
            u
        })
        .collect();
    Ok(SpectralResult {
        values,
        vectors,
        nodes: op.nodes.clone(),
        n: op.n,
        error_estimate: None,
        observed_order: None,
        low_order_warning: false,
    })
}

/// Solves on grids `n`, `2n` and `4n`; returns `(4 lambda_2n - lambda_n) / 3`
/// with vectors from grid `2n`. The `4n` grid only feeds the order estimate.
pub fn refine(problem: &SLProblem, n: usize, count: usize) -> Result<SpectralResult> {
    if n < 32 {
        return Err(Error::config(format!(
            "refinement needs a base grid >= 32, got {n}"
        )));
    }
    let coarse = eigen_smallest(&assemble(problem, n)?, count)?;
    let fine = eigen_smallest(&assemble(problem, 2 * n)?, count)?;
    let finest = eigen_smallest(&assemble(problem, 4 * n)?, count)?;
    let values = coarse
        .values
        .iter()
        .zip(&fine.values)
        .map(|(a, b)| (4.0 * b - a) / 3.0)
        .collect();
    let errors = coarse
        .values
        .iter()
        .zip(&fine.values)
        .map(|(a, b)| (b - a).abs() / 3.0)
        .collect();
    let orders: Vec<Option<f64>> = (0..count)
        .map(|k| observed_order(coarse.values[k], fine.values[k], finest.values[k]))
        .collect();
    let low = orders.iter().flatten().any(|&o| o < 1.5);
    Ok(SpectralResult {
        values,
        vectors: fine.vectors,
        nodes: fine.nodes,
        n: 2 * n,
        error_estimate: Some(errors),
        observed_order: Some(orders),
        low_order_warning: low,
    })
}

/// Convergence order from three values on grids `n`, `2n`, `4n`; `None` when the
/// differences are at rounding level.
pub fn observed_order(coarse: f64, fine: f64, finest: f64) -> Option<f64> {
    let d1 = coarse - fine;
    let d2 = fine - finest;
    let noise = 1e4 * f64::EPSILON * coarse.abs().max(1.0);
    if d1.abs() <= noise || d2.abs() <= noise || d1.signum() != d2.signum() {
        return None;
    }
    Some((d1 / d2).log2())
}
