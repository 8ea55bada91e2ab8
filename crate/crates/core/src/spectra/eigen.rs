use serde::Serialize;

use super::{solve, Estimate, SolverOptions};
use crate::error::{Error, Result};
use crate::model::{BaseSpec, CurvatureMode, WarpedProduct};
use crate::sturm::{assemble, DiscreteOperator, DomainKind, SLProblem};

/// A separated family of eigenfunctions on the warped product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// Fiber-constant functions of the base coordinate.
    Base,
    /// First non-zonal harmonic on the `S^{m-1}` orbits of a sphere base.
    Orbit,
    /// Fiber eigenmode `k >= 1`.
    Fiber(usize),
}

impl Channel {
    pub fn label(&self) -> String {
        match self {
            Channel::Base => "base".into(),
            Channel::Orbit => "base-orbit".into(),
            Channel::Fiber(k) => format!("fiber:{k}"),
        }
    }
}

fn domain(base: &BaseSpec) -> DomainKind {
    if base.is_periodic() {
        DomainKind::Periodic
    } else {
        DomainKind::Natural
    }
}

fn channel_potential(
    wp: &WarpedProduct,
    channel: Channel,
) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
    Ok(match channel {
        Channel::Base => Box::new(|_| 0.0),
        Channel::Orbit => match *wp.base() {
            BaseSpec::SphereLatitude { dim, radius } => {
                let nu = dim as f64 - 1.0;
                Box::new(move |t| nu / (radius * (t / radius).sin()).powi(2))
            }
            _ => return Err(Error::config("orbit channel exists only on sphere bases")),
        },
        Channel::Fiber(k) => {
            let mu = wp.fiber().eigenvalue(k)?.value;
            let w = wp.clone();
            Box::new(move |t| mu / w.warp(t).f.powi(2))
        }
    })
}

/// `-(1/rho)(rho u')' + V_channel u` with `rho = w f^p`.
pub fn laplace_problem(wp: &WarpedProduct, channel: Channel) -> Result<SLProblem> {
    let v = channel_potential(wp, channel)?;
    let w = wp.clone();
    SLProblem::new(
        domain(wp.base()),
        wp.length(),
        1.0,
        move |t| w.density(t),
        v,
    )
}

/// `-4 (1/rho)(rho u')' + (4 V_channel + R^M) u`.
pub fn perelman_problem(
    wp: &WarpedProduct,
    channel: Channel,
    mode: CurvatureMode,
) -> Result<SLProblem> {
    let v = channel_potential(wp, channel)?;
    let (w1, w2) = (wp.clone(), wp.clone());
    SLProblem::new(
        domain(wp.base()),
        wp.length(),
        4.0,
        move |t| w1.density(t),
        move |t| 4.0 * v(t) + w2.scalar_curvature_unchecked(t, w2.warp(t), mode),
    )
}

fn check_zero_mode(bottom: Estimate, next: f64) -> Result<()> {
    let tol = 1e-8 * next.abs().max(1.0) + 10.0 * bottom.error;
    if bottom.value.abs() > tol {
        return Err(Error::Discretization(format!(
            "bottom of a Laplace spectrum should be 0, got {:e}",
            bottom.value
        )));
    }
    Ok(())
}

/// First nonzero eigenvalue of `-Delta` on the base (`rho = w`, `V = 0`).
pub fn lambda1_base(base: &BaseSpec, opts: &SolverOptions) -> Result<Estimate> {
    base.validate()?;
    let b = *base;
    let problem = SLProblem::new(
        domain(base),
        base.length(),
        1.0,
        move |t| b.weight(t),
        |_| 0.0,
    )?;
    let (est, _) = solve(&problem, opts, 2)?;
    check_zero_mode(est[0], est[1].value)?;
    Ok(est[1])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeEntry {
    pub channel: Channel,
    /// Fiber eigenvalue `mu_k` for fiber channels.
    pub mu: Option<f64>,
    pub multiplicity: Option<u64>,
    /// Lowest admissible eigenvalue of the channel (second one for `Base`).
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lambda1M {
    pub value: f64,
    pub error: f64,
    /// Channels attaining the minimum (several when tied within error).
    pub achieving: Vec<Channel>,
    pub modes: Vec<ModeEntry>,
}

impl Lambda1M {
    pub fn achieving_label(&self) -> String {
        self.achieving
            .iter()
            .map(Channel::label)
            .collect::<Vec<_>>()
            .join("+")
    }

    /// Second eigenvalue of the fiber-constant channel: `lambda_1` of the base
    /// with respect to the measure `w f^p dt`.
    pub fn weighted_base(&self) -> Estimate {
        let e = self
            .modes
            .iter()
            .find(|m| m.channel == Channel::Base)
            .expect("base channel always solved");
        Estimate {
            value: e.value,
            error: e.error,
        }
    }
}

/// First nonzero eigenvalue of `-Delta^M`, minimized over separated channels.
///
/// Fiber modes are swept upwards until `mu_k / (max f)^2`, a lower bound for the
/// channel by potential monotonicity, exceeds the running minimum.
pub fn lambda1_m(wp: &WarpedProduct, opts: &SolverOptions) -> Result<Lambda1M> {
    let mut modes = Vec::new();
    let (base_est, _) = solve(&laplace_problem(wp, Channel::Base)?, opts, 2)?;
    check_zero_mode(base_est[0], base_est[1].value)?;
    modes.push(ModeEntry {
        channel: Channel::Base,
        mu: None,
        multiplicity: None,
        value: base_est[1].value,
        error: base_est[1].error,
    });
    if wp.base().first_orbit_eigenvalue().is_some() {
        let (e, _) = solve(&laplace_problem(wp, Channel::Orbit)?, opts, 1)?;
        modes.push(ModeEntry {
            channel: Channel::Orbit,
            mu: None,
            multiplicity: None,
            value: e[0].value,
            error: e[0].error,
        });
    }
    let fmax = wp.warp_max();
    let mut k = 1;
    loop {
        let current = modes
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("base channel");
        let fe = wp.fiber().eigenvalue(k)?;
        // keep channels that could tie the minimum
        if fe.value / (fmax * fmax) > current.value + tie_slack(current.error, current.value) {
            break;
        }
        let (e, _) = solve(&laplace_problem(wp, Channel::Fiber(k))?, opts, 1)?;
        modes.push(ModeEntry {
            channel: Channel::Fiber(k),
            mu: Some(fe.value),
            multiplicity: Some(fe.multiplicity),
            value: e[0].value,
            error: e[0].error,
        });
        k += 1;
    }
    let best = modes
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .cloned()
        .expect("at least one channel");
    let achieving = modes
        .iter()
        .filter(|m| m.value - best.value <= tie_slack(m.error + best.error, best.value))
        .map(|m| m.channel)
        .collect();
    Ok(Lambda1M {
        value: best.value,
        error: best.error,
        achieving,
        modes,
    })
}

fn tie_slack(error: f64, value: f64) -> f64 {
    10.0 * error + 1e-9 * value.abs().max(1.0)
}

/// Spaces whose Perelman lambda constant can be computed.
#[derive(Debug, Clone)]
pub enum PerelmanTarget<'a> {
    Base(&'a BaseSpec),
    Product(&'a WarpedProduct),
    /// Round `S^m(a)`.
    Sphere {
        dim: usize,
        radius: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerelmanValue {
    pub value: f64,
    pub error: f64,
    /// Bottom eigenvalue on the finest grid solved.
    pub grid_value: f64,
    /// `F(g, f)` evaluated directly at `f = -2 log u` of the computed ground state
    /// on that grid.
    pub f_functional: f64,
}

/// `lambda(g)`: bottom of the spectrum of `-4 Delta + R`.
pub fn perelman_lambda(
    target: PerelmanTarget<'_>,
    opts: &SolverOptions,
    mode: CurvatureMode,
) -> Result<PerelmanValue> {
    let problem = match target {
        PerelmanTarget::Base(base) => {
            base.validate()?;
            let b = *base;
            SLProblem::new(
                domain(base),
                base.length(),
                4.0,
                move |t| b.weight(t),
                move |t| b.scalar_curvature(t),
            )?
        }
        PerelmanTarget::Sphere { dim, radius } => {
            let b = BaseSpec::sphere(dim, radius)?;
            return perelman_lambda(PerelmanTarget::Base(&b), opts, mode);
        }
        PerelmanTarget::Product(wp) => {
            let ground = perelman_problem(wp, Channel::Base, mode)?;
            // fiber modes only add 4 mu_k / f^2 >= 0; check the first one anyway
            let (g, _) = solve(&ground, opts, 1)?;
            let (first, _) = solve(&perelman_problem(wp, Channel::Fiber(1), mode)?, opts, 1)?;
            if first[0].value < g[0].value - 10.0 * (first[0].error + g[0].error) - 1e-10 {
                return Err(Error::Discretization(format!(
                    "fiber mode 1 ({}) fell below the fiber-constant ground state ({})",
                    first[0].value, g[0].value
                )));
            }
            ground
        }
    };
    let (est, fine) = solve(&problem, opts, 1)?;
    let op = assemble(&problem, fine.n)?;
    let u = &fine.vectors[0];
    let f: Vec<f64> = u.iter().map(|v| -2.0 * v.abs().ln()).collect();
    Ok(PerelmanValue {
        value: est[0].value,
        error: est[0].error,
        grid_value: fine.values[0],
        f_functional: f_functional(&op, &f),
    })
}

/// Discrete `F(g, f) = int (|grad f|^2 + R) e^{-f} dv` on an assembled Perelman
/// operator (`sigma = 4`, potential `R`), using `|grad f|^2 e^{-f} = 4 |grad e^{-f/2}|^2`
/// on each face. Requires `int e^{-f} dv = 1`.
pub fn f_functional(op: &DiscreteOperator, f: &[f64]) -> f64 {
    let n = op.n;
    let u: Vec<f64> = f.iter().map(|v| (-0.5 * v).exp()).collect();
    let mut energy = 0.0;
    for i in 0..n {
        let j = if i + 1 < n { i + 1 } else { 0 };
        // face_flux already carries sigma = 4
        energy += op.face_flux[i] * (u[j] - u[i]).powi(2);
    }
    let potential: f64 = (0..n)
        .map(|i| op.potential[i] * u[i] * u[i] * op.weights[i])
        .sum();
    energy + potential
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSummary {
    pub lambda1_base: Estimate,
    /// `lambda_1` of the base for the measure `w f^p dt`.
    pub lambda1_base_weighted: Estimate,
    pub lambda1_m: Estimate,
    pub mode_achieving: String,
    pub perelman_base: Estimate,
    pub perelman_m: Estimate,
    pub perelman_m_reduced: Estimate,
    pub modes: Vec<ModeEntry>,
}

pub fn eigen_summary(wp: &WarpedProduct, opts: &SolverOptions) -> Result<EigenSummary> {
    let l1b = lambda1_base(wp.base(), opts)?;
    let l1m = lambda1_m(wp, opts)?;
    let pb = perelman_lambda(
        PerelmanTarget::Base(wp.base()),
        opts,
        CurvatureMode::Standard,
    )?;
    let pm = perelman_lambda(PerelmanTarget::Product(wp), opts, CurvatureMode::Standard)?;
    let pp = perelman_lambda(PerelmanTarget::Product(wp), opts, CurvatureMode::Reduced)?;
    Ok(EigenSummary {
        lambda1_base: l1b,
        lambda1_base_weighted: l1m.weighted_base(),
        lambda1_m: Estimate {
            value: l1m.value,
            error: l1m.error,
        },
        mode_achieving: l1m.achieving_label(),
        perelman_base: Estimate {
            value: pb.value,
            error: pb.error,
        },
        perelman_m: Estimate {
            value: pm.value,
            error: pm.error,
        },
        perelman_m_reduced: Estimate {
            value: pp.value,
            error: pp.error,
        },
        modes: l1m.modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FiberSpec, WarpSpec};
    use crate::oracle;
    use std::f64::consts::PI;

    const TP: f64 = 2.0 * PI;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    fn circle_product(fiber: FiberSpec, warp: WarpSpec) -> WarpedProduct {
        WarpedProduct::new(BaseSpec::circle(TP).unwrap(), fiber, warp).unwrap()
    }

    #[test]
    fn base_fixtures() {
        let c = lambda1_base(&BaseSpec::circle(TP).unwrap(), &opts()).unwrap();
        assert!((c.value - 1.0).abs() < 1e-6, "{c:?}");
        let i = lambda1_base(&BaseSpec::interval(PI).unwrap(), &opts()).unwrap();
        assert!((i.value - 1.0).abs() < 1e-6, "{i:?}");
        let s = lambda1_base(&BaseSpec::sphere(2, 1.0).unwrap(), &opts()).unwrap();
        assert!((s.value - 2.0).abs() < 1e-5, "{s:?}");
        let coarse = SolverOptions { n: 256, ..opts() };
        let s2 = lambda1_base(&BaseSpec::sphere(2, 1.0).unwrap(), &coarse).unwrap();
        assert!((s2.value - 2.0).abs() < 1e-5);
    }

    #[test]
    fn flat_product_is_jointly_achieved() {
        let wp = circle_product(
            FiberSpec::Circle { length: TP },
            WarpSpec::Constant { a: 1.0 },
        );
        let r = lambda1_m(&wp, &opts()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6);
        assert!(r.achieving.contains(&Channel::Base) && r.achieving.contains(&Channel::Fiber(1)));
        assert_eq!(r.achieving_label(), "base+fiber:1");
    }

    #[test]
    fn constant_warp_is_min_of_base_and_fiber() {
        let wp = circle_product(
            FiberSpec::RoundSphere { dim: 2 },
            WarpSpec::Constant { a: 2.0 },
        );
        let r = lambda1_m(&wp, &opts()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-6);
        assert_eq!(r.achieving, vec![Channel::Fiber(1)]);

        let bases = [
            BaseSpec::circle(3.0).unwrap(),
            BaseSpec::interval(2.0).unwrap(),
            BaseSpec::sphere(3, 1.5).unwrap(),
        ];
        let fibers = [
            FiberSpec::Circle { length: 4.0 },
            FiberSpec::RoundSphere { dim: 3 },
            FiberSpec::FlatTorus {
                sides: vec![1.0, 2.0],
            },
        ];
        for base in bases {
            for fiber in fibers.clone() {
                for a in [0.7, 1.9] {
                    let wp =
                        WarpedProduct::new(base, fiber.clone(), WarpSpec::Constant { a }).unwrap();
                    let l1b = lambda1_base(&base, &opts()).unwrap().value;
                    let expect = l1b.min(fiber.eigenvalue(1).unwrap().value / (a * a));
                    let got = lambda1_m(&wp, &opts()).unwrap().value;
                    assert!(
                        (got - expect).abs() < 1e-6,
                        "{base:?} {fiber:?} {a}: {got} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn perelman_fixtures() {
        let torus = circle_product(
            FiberSpec::Circle { length: TP },
            WarpSpec::Constant { a: 1.0 },
        );
        let t = perelman_lambda(
            PerelmanTarget::Product(&torus),
            &opts(),
            CurvatureMode::Standard,
        )
        .unwrap();
        assert!(t.value.abs() < 1e-8, "{t:?}");
        let s = perelman_lambda(
            PerelmanTarget::Sphere {
                dim: 2,
                radius: 1.0,
            },
            &opts(),
            CurvatureMode::Standard,
        )
        .unwrap();
        assert!((s.value - 2.0).abs() < 1e-6, "{s:?}");
        for v in [&t, &s] {
            assert!((v.f_functional - v.grid_value).abs() < 1e-8);
        }
        // constant R = 2/f^2 for an S^2 fiber over a flat base
        let c = circle_product(
            FiberSpec::RoundSphere { dim: 2 },
            WarpSpec::Constant { a: 1.5 },
        );
        let v = perelman_lambda(
            PerelmanTarget::Product(&c),
            &opts(),
            CurvatureMode::Standard,
        )
        .unwrap();
        assert!((v.value - 2.0 / 2.25).abs() < 1e-8);
    }

    #[test]
    fn perelman_between_min_and_mean_curvature() {
        for (fiber, b) in [
            (FiberSpec::Circle { length: TP }, 0.3),
            (FiberSpec::RoundSphere { dim: 2 }, 0.2),
        ] {
            let wp = circle_product(fiber, WarpSpec::CosineBump { a: 1.0, b, m: 2 });
            let v = perelman_lambda(
                PerelmanTarget::Product(&wp),
                &opts(),
                CurvatureMode::Standard,
            )
            .unwrap();
            let op = assemble(
                &perelman_problem(&wp, Channel::Base, CurvatureMode::Standard).unwrap(),
                2048,
            )
            .unwrap();
            let rmin = op.potential.iter().cloned().fold(f64::INFINITY, f64::min);
            let vol: f64 = op.weights.iter().sum();
            let mean = op
                .potential
                .iter()
                .zip(&op.weights)
                .map(|(r, w)| r * w)
                .sum::<f64>()
                / vol;
            assert!(
                v.value >= rmin - 1e-6 && v.value <= mean + 1e-6,
                "{rmin} {} {mean}",
                v.value
            );
            assert!((v.f_functional - v.grid_value).abs() < 1e-8);
        }
    }

    #[test]
    fn separation_matches_tensor_grid() {
        let wp = circle_product(
            FiberSpec::Circle { length: TP },
            WarpSpec::CosineBump {
                a: 1.0,
                b: 0.2,
                m: 1,
            },
        );
        let sep = lambda1_m(&wp, &opts()).unwrap().value;
        let grid = oracle::extrapolated_lambda1(&wp, 64, 64).unwrap().value;
        assert!(((sep - grid) / grid).abs() < 5e-4, "{sep} {grid}");
        let sep = perelman_lambda(
            PerelmanTarget::Product(&wp),
            &opts(),
            CurvatureMode::Standard,
        )
        .unwrap()
        .value;
        let grid = oracle::extrapolated_perelman(&wp, 64, 64, CurvatureMode::Standard)
            .unwrap()
            .value;
        assert!(((sep - grid) / grid.abs()).abs() < 5e-4, "{sep} {grid}");
    }

    #[test]
    fn summary_reports_modes() {
        let wp = circle_product(
            FiberSpec::RoundSphere { dim: 2 },
            WarpSpec::CosineBump {
                a: 1.0,
                b: 0.1,
                m: 1,
            },
        );
        let s = eigen_summary(&wp, &opts()).unwrap();
        assert!(s.lambda1_m.value > 0.0 && s.lambda1_base.value > 0.0);
        assert_eq!(s.modes[0].channel, Channel::Base);
        assert_eq!(s.mode_achieving, "base");
        assert!(s.perelman_base.value.abs() < 1e-8);
    }
}
