use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A base manifold reducible to one coordinate `t in [0, L]`.
///
/// `SphereLatitude` is the round sphere `S^m(a)` in geodesic polar distance from
/// a pole, restricted to functions of that distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BaseSpec {
    Circle { length: f64 },
    IntervalNeumann { length: f64 },
    SphereLatitude { dim: usize, radius: f64 },
}

impl BaseSpec {
    pub fn circle(length: f64) -> Result<Self> {
        positive("circle length", length)?;
        Ok(BaseSpec::Circle { length })
    }

    pub fn interval(length: f64) -> Result<Self> {
        positive("interval length", length)?;
        Ok(BaseSpec::IntervalNeumann { length })
    }

    pub fn sphere(dim: usize, radius: f64) -> Result<Self> {
        positive("sphere radius", radius)?;
        if dim < 2 {
            return Err(Error::config(format!(
                "sphere base needs dimension >= 2, got {dim}"
            )));
        }
        Ok(BaseSpec::SphereLatitude { dim, radius })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BaseSpec::Circle { length } => Self::circle(length).map(|_| ()),
            BaseSpec::IntervalNeumann { length } => Self::interval(length).map(|_| ()),
            BaseSpec::SphereLatitude { dim, radius } => Self::sphere(dim, radius).map(|_| ()),
        }
    }

    /// Coordinate length `L` (`pi * a` for a sphere).
    pub fn length(&self) -> f64 {
        match *self {
            BaseSpec::Circle { length } | BaseSpec::IntervalNeumann { length } => length,
            BaseSpec::SphereLatitude { radius, .. } => PI * radius,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            BaseSpec::SphereLatitude { dim, .. } => dim,
            _ => 1,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, BaseSpec::Circle { .. })
    }

    /// Reduced volume density `w(t)`.
    pub fn weight(&self, t: f64) -> f64 {
        match *self {
            BaseSpec::SphereLatitude { dim, radius } => (t / radius).sin().powi(dim as i32 - 1),
            _ => 1.0,
        }
    }

    /// `w'/w`; singular at the poles of a sphere.
    pub fn weight_log_derivative(&self, t: f64) -> f64 {
        match *self {
            BaseSpec::SphereLatitude { dim, radius } => {
                (dim as f64 - 1.0) / radius / (t / radius).tan()
            }
            _ => 0.0,
        }
    }

    /// `true` at a pole of a sphere base, where `w` vanishes.
    pub fn is_singular_point(&self, t: f64) -> bool {
        match *self {
            BaseSpec::SphereLatitude { radius, .. } => (t / radius).sin().abs() < 1e-12,
            _ => false,
        }
    }

    pub fn scalar_curvature(&self, _t: f64) -> f64 {
        match *self {
            BaseSpec::SphereLatitude { dim, radius } => {
                let m = dim as f64;
                m * (m - 1.0) / (radius * radius)
            }
            _ => 0.0,
        }
    }

    /// Smallest nonzero eigenvalue of the Laplacian on the `S^{m-1}` orbits of a
    /// sphere base, `m - 1`; `None` for one-dimensional bases.
    pub fn first_orbit_eigenvalue(&self) -> Option<f64> {
        match *self {
            BaseSpec::SphereLatitude { dim, .. } => Some(dim as f64 - 1.0),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            BaseSpec::Circle { length } => format!("circle(L={length})"),
            BaseSpec::IntervalNeumann { length } => format!("interval(L={length})"),
            BaseSpec::SphereLatitude { dim, radius } => format!("sphere(m={dim},a={radius})"),
        }
    }
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!(
            "{what} must be positive and finite, got {v}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_weight_vanishes_only_at_poles() {
        let b = BaseSpec::sphere(3, 2.0).unwrap();
        let l = b.length();
        assert!(b.weight(0.0).abs() < 1e-300);
        assert!(b.weight(l).abs() < 1e-30);
        for i in 1..50 {
            assert!(b.weight(l * i as f64 / 50.0) > 0.0);
        }
        assert_eq!(b.scalar_curvature(0.3), 6.0 / 4.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BaseSpec::circle(0.0).is_err());
        assert!(BaseSpec::interval(f64::NAN).is_err());
        assert!(BaseSpec::sphere(1, 1.0).is_err());
    }
}
