use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Homogeneous fiber `(F, g_0)` with a closed-form Laplace spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FiberSpec {
    /// Unit round sphere `S^p`.
    RoundSphere { dim: usize },
    /// Flat torus `R^p / (l_1 Z x ... x l_p Z)`.
    FlatTorus { sides: Vec<f64> },
    /// Circle of length `l`.
    Circle { length: f64 },
}

/// A distinct eigenvalue `mu_k` of `-Delta` on the fiber and its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberEigenvalue {
    pub value: f64,
    pub multiplicity: u64,
}

impl FiberSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FiberSpec::RoundSphere { dim } if *dim >= 1 => Ok(()),
            FiberSpec::RoundSphere { dim } => Err(Error::config(format!(
                "round sphere fiber needs dim >= 1, got {dim}"
            ))),
            FiberSpec::FlatTorus { sides } => {
                if sides.is_empty() {
                    return Err(Error::config(
                        "flat torus fiber needs at least one side length",
                    ));
                }
                if let Some(bad) = sides.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
                    return Err(Error::config(format!(
                        "torus side length must be positive, got {bad}"
                    )));
                }
                Ok(())
            }
            FiberSpec::Circle { length } if length.is_finite() && *length > 0.0 => Ok(()),
            FiberSpec::Circle { length } => Err(Error::config(format!(
                "circle fiber length must be positive, got {length}"
            ))),
        }
    }

    /// `p = dim F`.
    pub fn dim(&self) -> usize {
        match self {
            FiberSpec::RoundSphere { dim } => *dim,
            FiberSpec::FlatTorus { sides } => sides.len(),
            FiberSpec::Circle { .. } => 1,
        }
    }

    /// Scalar curvature `R_0` of the unit metric `g_0`.
    pub fn unit_scalar_curvature(&self) -> f64 {
        match self {
            FiberSpec::RoundSphere { dim } => (*dim * dim.saturating_sub(1)) as f64,
            _ => 0.0,
        }
    }

    /// Volume of `(F, g_0)`.
    pub fn unit_volume(&self) -> f64 {
        match self {
            FiberSpec::RoundSphere { dim } => sphere_volume(*dim),
            FiberSpec::FlatTorus { sides } => sides.iter().product(),
            FiberSpec::Circle { length } => *length,
        }
    }

    /// The `k`-th distinct eigenvalue of `-Delta_{g_0}`, ascending, `mu_0 = 0`.
    pub fn eigenvalue(&self, k: usize) -> Result<FiberEigenvalue> {
        self.validate()?;
        match self {
            FiberSpec::RoundSphere { dim } => {
                let (kf, p) = (k as f64, *dim as f64);
                let multiplicity = sphere_harmonic_dim(k as u64, *dim as u64).ok_or_else(|| {
                    Error::config(format!("multiplicity of degree {k} on S^{dim} overflows"))
                })?;
                Ok(FiberEigenvalue {
                    value: kf * (kf + p - 1.0),
                    multiplicity,
                })
            }
            FiberSpec::Circle { length } => {
                let w = 2.0 * PI * k as f64 / length;
                Ok(FiberEigenvalue {
                    value: w * w,
                    multiplicity: if k == 0 { 1 } else { 2 },
                })
            }
            FiberSpec::FlatTorus { sides } => torus_eigenvalue(sides, k),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            FiberSpec::RoundSphere { dim } => format!("S^{dim}"),
            FiberSpec::FlatTorus { sides } => {
                let s: Vec<String> = sides.iter().map(|x| x.to_string()).collect();
                format!("T^{}({})", sides.len(), s.join(","))
            }
            FiberSpec::Circle { length } => format!("circle(l={length})"),
        }
    }
}

fn sphere_volume(p: usize) -> f64 {
    // |S^0| = 2, |S^1| = 2 pi, |S^p| = 2 pi / (p - 1) |S^{p-2}|
    let mut v = if p % 2 == 0 { 2.0 } else { 2.0 * PI };
    let mut q = if p % 2 == 0 { 0 } else { 1 };
    while q < p {
        q += 2;
        v *= 2.0 * PI / (q as f64 - 1.0);
    }
    v
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Dimension of degree-`k` spherical harmonics on `S^p`.
fn sphere_harmonic_dim(k: u64, p: u64) -> Option<u64> {
    let top = binomial(k + p, p)?;
    let low = if k >= 2 { binomial(k + p - 2, p)? } else { 0 };
    Some(top - low)
}

fn torus_eigenvalue(sides: &[f64], k: usize) -> Result<FiberEigenvalue> {
    let freq: Vec<f64> = sides.iter().map(|l| 2.0 * PI / l).collect();
    let min_freq = freq.iter().cloned().fold(f64::INFINITY, f64::min);
    let dim = sides.len();
    let mut box_half: i64 = 1;
    loop {
        // every lattice point outside the box has some |k_i| > box_half
        let complete_below = ((box_half + 1) as f64 * min_freq).powi(2);
        let mut values: Vec<f64> = Vec::new();
        let mut idx = vec![-box_half; dim];
        loop {
            values.push(
                idx.iter()
                    .zip(&freq)
                    .map(|(&i, w)| (i as f64 * w).powi(2))
                    .sum(),
            );
            let mut pos = 0;
            loop {
                if pos == dim {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] > box_half {
                    idx[pos] = -box_half;
                    pos += 1;
                } else {
                    break;
                }
            }
            if pos == dim {
                break;
            }
        }
        values.sort_by(f64::total_cmp);
        let mut distinct: Vec<FiberEigenvalue> = Vec::new();
        for v in values {
            match distinct.last_mut() {
                Some(last) if (v - last.value).abs() <= 1e-12 * v.max(1.0) => {
                    last.multiplicity += 1
                }
                _ => distinct.push(FiberEigenvalue {
                    value: v,
                    multiplicity: 1,
                }),
            }
        }
        // the k-th value is certified once the (k+1)-th also lies in the complete range
        if distinct.len() > k + 1 && distinct[k + 1].value < complete_below {
            return Ok(distinct[k]);
        }
        box_half *= 2;
        if box_half > 1 << 12 || (2 * box_half + 1).pow(dim as u32) > 50_000_000 {
            return Err(Error::config(format!(
                "torus eigenvalue enumeration for k={k} exceeds the lattice budget"
            )));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bottom_is_simple_zero() {
        for f in [
            FiberSpec::RoundSphere { dim: 3 },
            FiberSpec::FlatTorus {
                sides: vec![1.0, 2.0],
            },
            FiberSpec::Circle { length: 3.0 },
        ] {
            let e = f.eigenvalue(0).unwrap();
            assert_eq!(e.value, 0.0);
            assert_eq!(e.multiplicity, 1);
        }
    }

    #[test]
    fn circle_and_sphere_first_modes() {
        let c = FiberSpec::Circle { length: 2.0 * PI }
            .eigenvalue(1)
            .unwrap();
        assert!((c.value - 1.0).abs() < 1e-15);
        assert_eq!(c.multiplicity, 2);
        let s = FiberSpec::RoundSphere { dim: 2 }.eigenvalue(1).unwrap();
        assert_eq!((s.value, s.multiplicity), (2.0, 3));
        let s2 = FiberSpec::RoundSphere { dim: 2 }.eigenvalue(2).unwrap();
        assert_eq!((s2.value, s2.multiplicity), (6.0, 5));
        let s3 = FiberSpec::RoundSphere { dim: 3 }.eigenvalue(2).unwrap();
        assert_eq!((s3.value, s3.multiplicity), (8.0, 9));
    }

    #[test]
    fn square_torus_spectrum() {
        let t = FiberSpec::FlatTorus {
            sides: vec![2.0 * PI, 2.0 * PI],
        };
        let expect = [
            (0.0, 1),
            (1.0, 4),
            (2.0, 4),
            (4.0, 4),
            (5.0, 8),
            (8.0, 4),
            (9.0, 4),
        ];
        for (k, (v, m)) in expect.iter().enumerate() {
            let e = t.eigenvalue(k).unwrap();
            assert!((e.value - v).abs() < 1e-12, "k={k}: {e:?}");
            assert_eq!(e.multiplicity, *m, "k={k}");
        }
    }

    #[test]
    fn volumes_and_curvature() {
        assert!((FiberSpec::RoundSphere { dim: 2 }.unit_volume() - 4.0 * PI).abs() < 1e-13);
        assert!((FiberSpec::RoundSphere { dim: 3 }.unit_volume() - 2.0 * PI * PI).abs() < 1e-13);
        assert_eq!(
            FiberSpec::RoundSphere { dim: 4 }.unit_scalar_curvature(),
            12.0
        );
        assert_eq!(
            FiberSpec::FlatTorus {
                sides: vec![1.0; 3]
            }
            .unit_scalar_curvature(),
            0.0
        );
    }

    #[test]
    fn sphere_multiplicities_sum_to_polynomial_dimension() {
        // harmonics of degree <= k restrict from polynomials of degree <= k in p+1 variables
        for p in 1..5u64 {
            for k in 0..6u64 {
                let total: u64 = (0..=k).map(|j| sphere_harmonic_dim(j, p).unwrap()).sum();
                let polys = binomial(k + p, p).unwrap() + binomial(k + p - 1, p).unwrap_or(0);
                assert_eq!(total, polys, "p={p} k={k}");
            }
        }
    }
}
