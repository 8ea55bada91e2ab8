use serde::Serialize;
use std::collections::BTreeMap;

use super::{
    dirac_first_eigenvalue, lambda1_base, lambda1_m, perelman_lambda, ModelSpace, PerelmanTarget,
    PerelmanValue, SolverOptions,
};
use crate::error::Result;
use crate::model::{BaseSpec, CurvatureMode, FiberSpec, WarpSpec, WarpedProduct};
use crate::oracle::{lemma1_residual, TestFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InequalityName {
    #[serde(rename = "Thm1-upper")]
    Thm1Upper,
    #[serde(rename = "Thm1-lower-A0")]
    Thm1LowerA0,
    #[serde(rename = "Thm1-lower-c")]
    Thm1LowerC,
    #[serde(rename = "Thm2")]
    Thm2,
    #[serde(rename = "Thm2-paper-curvature")]
    Thm2ReducedCurvature,
    #[serde(rename = "Thm4-stated")]
    Thm4Stated,
    #[serde(rename = "Thm4-quartered")]
    Thm4Quartered,
    #[serde(rename = "Lemma1-residual")]
    Lemma1Residual,
}

impl InequalityName {
    pub fn as_str(&self) -> &'static str {
        match self {
            InequalityName::Thm1Upper => "Thm1-upper",
            InequalityName::Thm1LowerA0 => "Thm1-lower-A0",
            InequalityName::Thm1LowerC => "Thm1-lower-c",
            InequalityName::Thm2 => "Thm2",
            InequalityName::Thm2ReducedCurvature => "Thm2-paper-curvature",
            InequalityName::Thm4Stated => "Thm4-stated",
            InequalityName::Thm4Quartered => "Thm4-quartered",
            InequalityName::Lemma1Residual => "Lemma1-residual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

impl Verdict {
    pub fn classify(margin: f64, tol: f64) -> Verdict {
        if margin >= -tol {
            Verdict::Holds
        } else if margin < -10.0 * tol {
            Verdict::Violated
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// One checked inequality `lhs <= rhs`; `margin = rhs - lhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: InequalityName,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub tol: f64,
    /// Combined discretization error of the computed quantities involved.
    pub richardson_error: f64,
    pub n: usize,
    pub space: String,
    pub mode_achieving: Option<String>,
    /// Supplementary columns (alternative readings of constants and measures).
    pub extras: BTreeMap<String, f64>,
}

impl InequalityReport {
    fn new(
        name: InequalityName,
        lhs: f64,
        rhs: f64,
        error: f64,
        opts: &SolverOptions,
        space: &str,
    ) -> Self {
        let tol = (10.0 * error).max(opts.tol);
        let margin = rhs - lhs;
        Self {
            name,
            lhs,
            rhs,
            margin,
            verdict: Verdict::classify(margin, tol),
            tol,
            richardson_error: error,
            n: opts.n,
            space: space.to_string(),
            mode_achieving: None,
            extras: BTreeMap::new(),
        }
    }

    fn extra(mut self, key: &str, value: f64) -> Self {
        self.extras.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone)]
pub enum VerifyTarget {
    Product(WarpedProduct),
    Model(ModelSpace),
}

/// Evaluate every applicable inequality. Violations are reported, never raised.
pub fn verify_inequalities(
    target: &VerifyTarget,
    opts: &SolverOptions,
) -> Result<Vec<InequalityReport>> {
    opts.validate()?;
    match target {
        VerifyTarget::Product(wp) => verify_product(wp, opts),
        VerifyTarget::Model(m) => verify_model(m, opts),
    }
}

fn verify_product(wp: &WarpedProduct, opts: &SolverOptions) -> Result<Vec<InequalityReport>> {
    use InequalityName::*;
    let space = wp.describe();
    let k = wp.comparison_constants(opts.n.max(64))?;
    let l1b = lambda1_base(wp.base(), opts)?;
    let l1m = lambda1_m(wp, opts)?;
    let mode = l1m.achieving_label();
    let weighted = l1m.weighted_base();
    let err = l1b.error + l1m.error;
    let mut out = Vec::new();

    let mut r = InequalityReport::new(
        Thm1Upper,
        l1m.value,
        l1b.value + k.lambda_bar_f + k.a1,
        err,
        opts,
        &space,
    )
    .extra("a1", k.a1)
    .extra("lambda_bar_f", k.lambda_bar_f)
    .extra(
        "margin_divergence_form",
        l1b.value + k.lambda_bar_f + k.a1_divergence - l1m.value,
    );
    r.mode_achieving = Some(mode.clone());
    out.push(r);

    let mut r = InequalityReport::new(Thm1LowerA0, l1b.value + k.a0, l1m.value, err, opts, &space)
        .extra("a0", k.a0)
        .extra(
            "margin_divergence_form",
            l1m.value - l1b.value - k.a0_divergence,
        )
        .extra("margin_weighted_base", l1m.value - weighted.value - k.a0);
    r.mode_achieving = Some(mode.clone());
    out.push(r);

    let mut r = InequalityReport::new(
        Thm1LowerC,
        l1b.value + k.c_thm1,
        l1m.value,
        err,
        opts,
        &space,
    )
    .extra("c", k.c_thm1)
    .extra("lambda1_base_weighted", weighted.value)
    .extra(
        "margin_weighted_base",
        l1m.value - weighted.value - k.c_thm1,
    );
    r.mode_achieving = Some(mode);
    out.push(r);

    let pb = perelman_lambda(
        PerelmanTarget::Base(wp.base()),
        opts,
        CurvatureMode::Standard,
    )?;
    for (name, cm) in [
        (Thm2, CurvatureMode::Standard),
        (Thm2ReducedCurvature, CurvatureMode::Reduced),
    ] {
        let pm = perelman_lambda(PerelmanTarget::Product(wp), opts, cm)?;
        out.push(
            InequalityReport::new(
                name,
                pb.value + k.c_thm2,
                pm.value,
                pb.error + pm.error,
                opts,
                &space,
            )
            .extra("c", k.c_thm2)
            .extra("c_split", k.c_thm2_split)
            .extra("margin_split", pm.value - pb.value - k.c_thm2_split)
            .extra("lambda_base", pb.value)
            .extra("lambda_total", pm.value),
        );
    }

    let circle_fiber = matches!(wp.fiber(), FiberSpec::Circle { .. })
        || matches!(wp.fiber(), FiberSpec::FlatTorus { sides } if sides.len() == 1);
    if circle_fiber && !matches!(wp.base(), BaseSpec::SphereLatitude { .. }) {
        let nf = 32;
        let fine = lemma1_residual(wp, TestFunction::cross(), opts.n, nf)?;
        let coarse = lemma1_residual(wp, TestFunction::cross(), opts.n / 2, nf)?;
        let err = (fine.warped - coarse.warped).abs() / 3.0;
        out.push(
            InequalityReport::new(Lemma1Residual, fine.warped, 0.0, err, opts, &space)
                .extra("first_identity_residual", fine.first_identity)
                .extra("flipped_sign_residual", fine.flipped_sign),
        );
    }
    Ok(out)
}

/// `lambda(g)` of a model space (round sphere, or flat torus as a circle times a torus).
pub fn model_perelman_lambda(model: &ModelSpace, opts: &SolverOptions) -> Result<PerelmanValue> {
    model.validate()?;
    match model {
        ModelSpace::RoundSphere { dim, radius } => perelman_lambda(
            PerelmanTarget::Sphere {
                dim: *dim,
                radius: *radius,
            },
            opts,
            CurvatureMode::Standard,
        ),
        ModelSpace::FlatTorus { sides, .. } => {
            let base = BaseSpec::circle(sides[0])?;
            if sides.len() == 1 {
                perelman_lambda(PerelmanTarget::Base(&base), opts, CurvatureMode::Standard)
            } else {
                let fiber = FiberSpec::FlatTorus {
                    sides: sides[1..].to_vec(),
                };
                let wp = WarpedProduct::new(base, fiber, WarpSpec::Constant { a: 1.0 })?;
                perelman_lambda(PerelmanTarget::Product(&wp), opts, CurvatureMode::Standard)
            }
        }
    }
}

fn verify_model(model: &ModelSpace, opts: &SolverOptions) -> Result<Vec<InequalityReport>> {
    let space = model.describe();
    let dirac = dirac_first_eigenvalue(model)?;
    let lambda = model_perelman_lambda(model, opts)?;
    let d2 = dirac * dirac;
    Ok(vec![
        InequalityReport::new(
            InequalityName::Thm4Stated,
            lambda.value,
            d2,
            lambda.error,
            opts,
            &space,
        )
        .extra("dirac_lambda1", dirac),
        InequalityReport::new(
            InequalityName::Thm4Quartered,
            lambda.value / 4.0,
            d2,
            lambda.error / 4.0,
            opts,
            &space,
        )
        .extra("dirac_lambda1", dirac),
    ])
}
