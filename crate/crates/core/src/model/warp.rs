use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::BaseSpec;
use crate::error::{Error, Result};

/// Warp function family `f(t) > 0` on the base coordinate.
///
/// `CosineBump` is `a + b cos(2 pi m t / L)` on a circle and `a + b cos(pi m t / L)`
/// otherwise, so `f'` vanishes at the ends of an interval or at the poles of a
/// sphere. `Tabulated` samples are equispaced: `t_j = j L / N` on a circle,
/// `t_j = j L / (N - 1)` (both ends included) otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WarpSpec {
    Constant { a: f64 },
    CosineBump { a: f64, b: f64, m: u32 },
    Tabulated { samples: Vec<f64> },
}

/// `f`, `f'`, `f''` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpValue {
    pub f: f64,
    pub df: f64,
    pub ddf: f64,
}

/// A warp bound to a base: knows its domain length and periodicity.
#[derive(Debug, Clone)]
pub(crate) enum BoundWarp {
    Constant(f64),
    Cosine { a: f64, b: f64, k: f64 },
    Table(Table),
}

#[derive(Debug, Clone)]
pub(crate) struct Table {
    periodic: bool,
    spacing: f64,
    f: Vec<f64>,
    df: Vec<f64>,
    ddf: Vec<f64>,
}

impl WarpSpec {
    pub fn describe(&self) -> String {
        match self {
            WarpSpec::Constant { a } => format!("constant(a={a})"),
            WarpSpec::CosineBump { a, b, m } => format!("cosine_bump(a={a},b={b},m={m})"),
            WarpSpec::Tabulated { samples } => format!("tabulated(N={})", samples.len()),
        }
    }

    pub(crate) fn bind(&self, base: &BaseSpec) -> Result<BoundWarp> {
        let length = base.length();
        match self {
            WarpSpec::Constant { a } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(Error::invariant(format!(
                        "constant warp must be positive, got {a}"
                    )));
                }
                Ok(BoundWarp::Constant(*a))
            }
            WarpSpec::CosineBump { a, b, m } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && b.abs() < *a) {
                    return Err(Error::invariant(format!(
                        "cosine bump needs a > 0 and |b| < a, got a={a} b={b}"
                    )));
                }
                if *m < 1 {
                    return Err(Error::config("cosine bump frequency m must be >= 1"));
                }
                let k = if base.is_periodic() {
                    2.0 * PI * *m as f64 / length
                } else {
                    PI * *m as f64 / length
                };
                Ok(BoundWarp::Cosine { a: *a, b: *b, k })
            }
            WarpSpec::Tabulated { samples } => {
                Table::new(samples, length, base.is_periodic()).map(BoundWarp::Table)
            }
        }
    }
}

impl BoundWarp {
    pub(crate) fn eval(&self, t: f64) -> WarpValue {
        match self {
            BoundWarp::Constant(a) => WarpValue {
                f: *a,
                df: 0.0,
                ddf: 0.0,
            },
            BoundWarp::Cosine { a, b, k } => {
                let (s, c) = (k * t).sin_cos();
                WarpValue {
                    f: a + b * c,
                    df: -b * k * s,
                    ddf: -b * k * k * c,
                }
            }
            BoundWarp::Table(table) => table.eval(t),
        }
    }

    /// Smallest value of `f` over the whole base.
    pub(crate) fn min(&self) -> f64 {
        match self {
            BoundWarp::Constant(a) => *a,
            BoundWarp::Cosine { a, b, .. } => a - b.abs(),
            // piecewise-linear interpolant: extremes sit at nodes
            BoundWarp::Table(t) => t.f.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    pub(crate) fn max(&self) -> f64 {
        match self {
            BoundWarp::Constant(a) => *a,
            BoundWarp::Cosine { a, b, .. } => a + b.abs(),
            BoundWarp::Table(t) => t.f.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub(crate) fn is_constant(&self) -> bool {
        match self {
            BoundWarp::Constant(_) => true,
            BoundWarp::Cosine { b, .. } => *b == 0.0,
            BoundWarp::Table(t) => t.f.iter().all(|&v| v == t.f[0]),
        }
    }

    /// Critical points of `f` in `[0, L]`: exact for the cosine family, discrete
    /// local extrema of the samples for a table.
    pub(crate) fn critical_points(&self, length: f64, periodic: bool) -> Vec<f64> {
        match self {
            BoundWarp::Constant(_) => Vec::new(),
            BoundWarp::Cosine { k, .. } => {
                let step = PI / k;
                let count = (length / step).round() as usize;
                let last = if periodic {
                    count.saturating_sub(1)
                } else {
                    count
                };
                (0..=last).map(|j| (j as f64 * step).min(length)).collect()
            }
            BoundWarp::Table(t) => t.local_extrema(),
        }
    }
}

impl Table {
    fn new(samples: &[f64], length: f64, periodic: bool) -> Result<Self> {
        if samples.len() < 8 {
            return Err(Error::config(format!(
                "tabulated warp needs at least 8 samples, got {}",
                samples.len()
            )));
        }
        if let Some(bad) = samples.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::invariant(format!(
                "tabulated warp sample must be positive, got {bad}"
            )));
        }
        let n = samples.len();
        let spacing = if periodic {
            length / n as f64
        } else {
            length / (n - 1) as f64
        };
        // neighbours: periodic wrap, or even reflection so f' = 0 at both ends
        let at = |j: isize| -> f64 {
            let n = n as isize;
            let idx = if periodic {
                j.rem_euclid(n)
            } else if j < 0 {
                -j
            } else if j >= n {
                2 * (n - 1) - j
            } else {
                j
            };
            samples[idx as usize]
        };
        let h = spacing;
        let df = (0..n as isize)
            .map(|j| (at(j + 1) - at(j - 1)) / (2.0 * h))
            .collect();
        let ddf = (0..n as isize)
            .map(|j| (at(j + 1) - 2.0 * at(j) + at(j - 1)) / (h * h))
            .collect();
        Ok(Table {
            periodic,
            spacing,
            f: samples.to_vec(),
            df,
            ddf,
        })
    }

    fn eval(&self, t: f64) -> WarpValue {
        let n = self.f.len();
        let x = t / self.spacing;
        let (j0, j1, s) = if self.periodic {
            let x = x.rem_euclid(n as f64);
            let j = (x.floor() as usize).min(n - 1);
            (j, (j + 1) % n, x - j as f64)
        } else {
            let x = x.clamp(0.0, (n - 1) as f64);
            let j = (x.floor() as usize).min(n - 2);
            (j, j + 1, x - j as f64)
        };
        let lerp = |v: &[f64]| (1.0 - s) * v[j0] + s * v[j1];
        WarpValue {
            f: lerp(&self.f),
            df: lerp(&self.df),
            ddf: lerp(&self.ddf),
        }
    }

    fn local_extrema(&self) -> Vec<f64> {
        let n = self.f.len();
        let get = |j: isize| -> f64 {
            if self.periodic {
                self.f[j.rem_euclid(n as isize) as usize]
            } else {
                self.f[j.clamp(0, n as isize - 1) as usize]
            }
        };
        (0..n as isize)
            .filter(|&j| {
                let (l, c, r) = (get(j - 1), get(j), get(j + 1));
                (c >= l && c >= r) || (c <= l && c <= r)
            })
            .map(|j| j as f64 * self.spacing)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_derivatives_vanish_at_interval_ends() {
        let base = BaseSpec::interval(3.0).unwrap();
        let w = WarpSpec::CosineBump {
            a: 1.0,
            b: 0.4,
            m: 3,
        }
        .bind(&base)
        .unwrap();
        assert!(w.eval(0.0).df.abs() < 1e-15);
        assert!(w.eval(3.0).df.abs() < 1e-14);
        let crit = w.critical_points(3.0, false);
        assert_eq!(crit.len(), 4);
    }

    #[test]
    fn rejects_non_positive_warps() {
        let base = BaseSpec::circle(1.0).unwrap();
        assert!(WarpSpec::CosineBump {
            a: 1.0,
            b: 1.0,
            m: 1
        }
        .bind(&base)
        .is_err());
        assert!(WarpSpec::Constant { a: 0.0 }.bind(&base).is_err());
        let mut s = vec![1.0; 16];
        s[3] = -0.1;
        assert!(WarpSpec::Tabulated { samples: s }.bind(&base).is_err());
    }

    #[test]
    fn table_tracks_cosine_at_second_order() {
        let base = BaseSpec::circle(2.0 * PI).unwrap();
        let exact = WarpSpec::CosineBump {
            a: 1.0,
            b: 0.2,
            m: 1,
        }
        .bind(&base)
        .unwrap();
        let err = |n: usize| {
            let samples = (0..n)
                .map(|j| exact.eval(2.0 * PI * j as f64 / n as f64).f)
                .collect();
            let tab = WarpSpec::Tabulated { samples }.bind(&base).unwrap();
            (0..97)
                .map(|i| {
                    let t = 0.37 + i as f64 * 0.061;
                    let (a, b) = (tab.eval(t), exact.eval(t));
                    (a.f - b.f)
                        .abs()
                        .max((a.df - b.df).abs())
                        .max((a.ddf - b.ddf).abs())
                })
                .fold(0.0, f64::max)
        };
        let order = (err(64) / err(128)).log2();
        assert!(order > 1.9, "order {order}");
    }
}
