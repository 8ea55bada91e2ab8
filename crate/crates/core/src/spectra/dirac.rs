use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Spin manifolds whose Dirac spectrum is known in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpace {
    /// Round `S^n(a)`.
    RoundSphere { dim: usize, radius: f64 },
    /// Flat torus with side lengths `l_i`. `spin[i]` is 0 for the periodic and
    /// 0.5 for the antiperiodic spin structure along side `i`.
    FlatTorus { sides: Vec<f64>, spin: Vec<f64> },
}

impl ModelSpace {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpace::RoundSphere { dim, radius } => {
                if *dim < 2 {
                    return Err(Error::config(format!(
                        "model sphere needs dim >= 2, got {dim}"
                    )));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::config(format!(
                        "sphere radius must be positive, got {radius}"
                    )));
                }
            }
            ModelSpace::FlatTorus { sides, spin } => {
                if sides.is_empty() || sides.len() != spin.len() {
                    return Err(Error::config("flat torus needs one spin offset per side"));
                }
                if sides.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                    return Err(Error::config("torus side lengths must be positive"));
                }
                if spin.iter().any(|d| *d != 0.0 && *d != 0.5) {
                    return Err(Error::config("spin offsets must be 0 or 0.5"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpace::RoundSphere { dim, .. } => *dim,
            ModelSpace::FlatTorus { sides, .. } => sides.len(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ModelSpace::RoundSphere { dim, radius } => format!("S^{dim}({radius})"),
            ModelSpace::FlatTorus { sides, spin } => {
                format!("T^{} sides {sides:?} spin {spin:?}", sides.len())
            }
        }
    }
}

/// Smallest `|eigenvalue|` of the Dirac operator.
///
/// Sphere: the spectrum is `+-(n/2 + k)/a`. Torus: eigenvalues are
/// `+-2 pi |(k_i + delta_i)/l_i|` over the dual lattice, minimized coordinatewise.
pub fn dirac_first_eigenvalue(space: &ModelSpace) -> Result<f64> {
    space.validate()?;
    Ok(match space {
        ModelSpace::RoundSphere { dim, radius } => *dim as f64 / (2.0 * radius),
        ModelSpace::FlatTorus { sides, spin } => {
            2.0 * PI
                * sides
                    .iter()
                    .zip(spin)
                    .map(|(l, d)| (d / l).powi(2))
                    .sum::<f64>()
                    .sqrt()
        }
    })
}
