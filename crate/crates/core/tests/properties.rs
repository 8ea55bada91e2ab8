use std::f64::consts::PI;

use proptest::prelude::*;

use warpspec::model::{BaseSpec, CurvatureMode, FiberSpec, WarpSpec, WarpedProduct};
use warpspec::spectra::{
    lambda1_base, lambda1_m, perelman_lambda, perelman_problem, verify_inequalities, Channel,
    InequalityName, ModelSpace, PerelmanTarget, SolverOptions, Verdict, VerifyTarget,
};
use warpspec::sturm::{assemble, eigen_smallest, DomainKind, SLProblem};

const TP: f64 = 2.0 * PI;

fn quick() -> SolverOptions {
    SolverOptions {
        n: 128,
        ..SolverOptions::default()
    }
}

fn fiber_strategy() -> impl Strategy<Value = FiberSpec> {
    prop_oneof![
        (0.5f64..8.0).prop_map(|length| FiberSpec::Circle { length }),
        (1usize..5).prop_map(|dim| FiberSpec::RoundSphere { dim }),
        prop::collection::vec(0.5f64..4.0, 1..4).prop_map(|sides| FiberSpec::FlatTorus { sides }),
    ]
}

fn base_strategy() -> impl Strategy<Value = BaseSpec> {
    prop_oneof![
        (1.0f64..10.0).prop_map(|l| BaseSpec::circle(l).unwrap()),
        (1.0f64..5.0).prop_map(|l| BaseSpec::interval(l).unwrap()),
        (2usize..5, 0.5f64..2.0).prop_map(|(m, a)| BaseSpec::sphere(m, a).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn constant_warp_is_min_of_base_and_fiber(base in base_strategy(), fiber in fiber_strategy(), a in 0.3f64..3.0) {
        let wp = WarpedProduct::new(base, fiber.clone(), WarpSpec::Constant { a }).unwrap();
        let opts = SolverOptions::default();
        let expect = lambda1_base(&base, &opts).unwrap().value.min(fiber.eigenvalue(1).unwrap().value / (a * a));
        let got = lambda1_m(&wp, &opts).unwrap().value;
        prop_assert!((got - expect).abs() <= 1e-6 * expect.max(1.0), "{} vs {}", got, expect);
    }

    #[test]
    fn perelman_sits_between_min_and_mean_curvature(
        fiber in fiber_strategy(), b in 0.0f64..0.4, m in 1u32..3, mode in prop_oneof![Just(CurvatureMode::Standard), Just(CurvatureMode::Reduced)]
    ) {
        let wp = WarpedProduct::new(BaseSpec::circle(TP).unwrap(), fiber, WarpSpec::CosineBump { a: 1.0, b, m }).unwrap();
        let v = perelman_lambda(PerelmanTarget::Product(&wp), &quick(), mode).unwrap();
        let op = assemble(&perelman_problem(&wp, Channel::Base, mode).unwrap(), 1024).unwrap();
        let rmin = op.potential.iter().cloned().fold(f64::INFINITY, f64::min);
        let vol: f64 = op.weights.iter().sum();
        let mean = op.potential.iter().zip(&op.weights).map(|(r, w)| r * w).sum::<f64>() / vol;
        let tol = 1e-6 * mean.abs().max(1.0);
        prop_assert!(v.value >= rmin - tol && v.value <= mean + tol, "{} not in [{}, {}]", v.value, rmin, mean);
        prop_assert!((v.f_functional - v.grid_value).abs() <= 1e-8 * v.grid_value.abs().max(1.0));
    }

    #[test]
    fn constant_curvature_gives_constant_lambda(dim in 1usize..5, a in 0.5f64..3.0) {
        let wp = WarpedProduct::new(BaseSpec::circle(3.0).unwrap(), FiberSpec::RoundSphere { dim }, WarpSpec::Constant { a }).unwrap();
        let r = (dim * (dim - 1)) as f64 / (a * a);
        let v = perelman_lambda(PerelmanTarget::Product(&wp), &quick(), CurvatureMode::Standard).unwrap();
        prop_assert!((v.value - r).abs() <= 1e-8 * r.max(1.0));
    }

    #[test]
    fn larger_warp_lowers_fiber_channel(b1 in 0.0f64..1.0, db in 0.0f64..1.0, mu in 0.5f64..6.0) {
        // f_b = 1 + b (1 + cos t)/2 grows pointwise with b, so mu / f_b^2 shrinks
        let channel = |b: f64| {
            let p = SLProblem::new(DomainKind::Periodic, TP, 1.0, |t| 1.0 + 0.3 * t.sin(), move |t| {
                mu / (1.0 + b * 0.5 * (1.0 + t.cos())).powi(2)
            })
            .unwrap();
            eigen_smallest(&assemble(&p, 256).unwrap(), 1).unwrap().values[0]
        };
        let (lo, hi) = (channel(b1 + db), channel(b1));
        prop_assert!(lo <= hi + 1e-12 * hi, "{} > {}", lo, hi);
    }

    #[test]
    fn quartered_dirac_bound_on_spheres(
        n in 2usize..=6, a in prop::sample::select(vec![0.5, 1.0, 2.0])
    ) {
        let r = verify_inequalities(&VerifyTarget::Model(ModelSpace::RoundSphere { dim: n, radius: a }), &quick()).unwrap();
        let q = r.iter().find(|x| x.name == InequalityName::Thm4Quartered).unwrap();
        let s = r.iter().find(|x| x.name == InequalityName::Thm4Stated).unwrap();
        prop_assert_eq!(q.verdict, Verdict::Holds);
        let expect = (n * n) as f64 / (4.0 * a * a) - (n * (n - 1)) as f64 / (4.0 * a * a);
        prop_assert!((q.margin - expect).abs() <= 1e-6 * expect.max(1.0));
        prop_assert_eq!(s.verdict, Verdict::Violated);
    }

    #[test]
    fn quartered_dirac_bound_on_spin_tori(
        sides in prop::collection::vec(0.5f64..5.0, 1..4), seed in 1u32..8
    ) {
        let spin: Vec<f64> = (0..sides.len()).map(|i| if seed >> i & 1 == 1 { 0.5 } else { 0.0 }).collect();
        let r = verify_inequalities(&VerifyTarget::Model(ModelSpace::FlatTorus { sides, spin }), &quick()).unwrap();
        prop_assert!(r.iter().all(|x| x.verdict == Verdict::Holds));
    }
}

#[test]
fn tabulated_warp_converges_at_second_order() {
    let wp_of = |warp| {
        WarpedProduct::new(
            BaseSpec::circle(TP).unwrap(),
            FiberSpec::Circle { length: TP },
            warp,
        )
        .unwrap()
    };
    let opts = SolverOptions::default();
    let exact = lambda1_m(
        &wp_of(WarpSpec::CosineBump {
            a: 1.0,
            b: 0.3,
            m: 1,
        }),
        &opts,
    )
    .unwrap()
    .value;
    let table = |n: usize| {
        let samples = (0..n)
            .map(|j| 1.0 + 0.3 * (TP * j as f64 / n as f64).cos())
            .collect();
        (lambda1_m(&wp_of(WarpSpec::Tabulated { samples }), &opts)
            .unwrap()
            .value
            - exact)
            .abs()
    };
    let (e1, e2, e3) = (table(64), table(128), table(256));
    for (a, b) in [(e1, e2), (e2, e3)] {
        let order = (a / b).log2();
        assert!(
            (1.8..=2.2).contains(&order),
            "order {order} from {a:e} -> {b:e}"
        );
    }
}

#[test]
fn flat_product_reports_hold_in_both_curvature_modes() {
    let wp = WarpedProduct::new(
        BaseSpec::interval(PI).unwrap(),
        FiberSpec::FlatTorus {
            sides: vec![1.0, 1.5],
        },
        WarpSpec::Constant { a: 1.0 },
    )
    .unwrap();
    let r = verify_inequalities(&VerifyTarget::Product(wp), &SolverOptions::default()).unwrap();
    assert!(r.iter().all(|x| x.verdict == Verdict::Holds), "{r:#?}");
}
