//! wasm-bindgen surface for the browser demo in `www/`.
//!
//! Every entry point takes a run configuration as TOML text (the same format
//! the command line tool reads) and returns a JSON string. The `*_json`
//! functions are the plain Rust versions, so native tests can call them.

use std::path::Path;

use serde_json::{json, Value};
use warpspec::config::RunConfig;
use warpspec::model::{CurvatureMode, WarpedProduct};
use warpspec::spectra::{
    dirac_first_eigenvalue, eigen_summary, model_perelman_lambda, verify_inequalities, ModelSpace,
    SolverOptions, VerifyTarget,
};
use warpspec::{Error, Result};
use wasm_bindgen::prelude::*;

fn parse(toml: &str) -> Result<RunConfig> {
    RunConfig::from_toml_str(toml)
}

fn product(cfg: &RunConfig) -> Result<WarpedProduct> {
    // no filesystem in the browser, so samples_path is rejected by the loader
    cfg.product(Path::new("."))?
        .ok_or_else(|| Error::Config("the demo needs a [base] section".into()))
}

fn to_js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string())
        .map_err(|e| JsError::new(&e.to_string()))
}

/// Warp, density, scalar curvature and first fiber-mode potential along the base.
pub fn warp_profile_json(toml: &str, points: usize) -> Result<Value> {
    let wp = product(&parse(toml)?)?;
    let points = points.clamp(2, 4096);
    let mu1 = wp.fiber().eigenvalue(1)?.value;
    let len = wp.length();
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let t = len * (i as f64 + 0.5) / points as f64;
        let f = wp.warp(t).f;
        rows.push(json!({
            "t": t,
            "f": f,
            "density": wp.density(t),
            "scalar_curvature": wp.scalar_curvature(t, CurvatureMode::Standard)?,
            "fiber_potential": mu1 / (f * f),
        }));
    }
    Ok(json!({
        "space": wp.describe(),
        "length": len,
        "warp_min": wp.warp_min(),
        "warp_max": wp.warp_max(),
        "mu1": mu1,
        "rows": rows,
    }))
}

/// Eigenvalue summary plus the inequality reports for a product or model space.
pub fn spectrum_json(toml: &str) -> Result<Value> {
    let cfg = parse(toml)?;
    let opts = &cfg.solver;
    if let Some(model) = cfg.model()? {
        let reports = verify_inequalities(&VerifyTarget::Model(model.clone()), opts)?;
        return Ok(json!({
            "space": model.describe(),
            "dirac_lambda1": dirac_first_eigenvalue(&model)?,
            "perelman": model_perelman_lambda(&model, opts)?,
            "reports": reports,
        }));
    }
    let wp = product(&cfg)?;
    let summary = eigen_summary(&wp, opts)?;
    let reports = verify_inequalities(&VerifyTarget::Product(wp.clone()), opts)?;
    Ok(json!({ "space": wp.describe(), "summary": summary, "reports": reports }))
}

/// Both Dirac bounds on round spheres S^2 .. S^max_dim of one radius.
pub fn dirac_table_json(max_dim: usize, radius: f64, n: usize) -> Result<Value> {
    let opts = SolverOptions {
        n,
        ..SolverOptions::default()
    };
    let mut rows = Vec::new();
    for dim in 2..=max_dim.clamp(2, 12) {
        let model = ModelSpace::RoundSphere { dim, radius };
        let reports = verify_inequalities(&VerifyTarget::Model(model.clone()), &opts)?;
        rows.push(json!({
            "dim": dim,
            "dirac_lambda1": dirac_first_eigenvalue(&model)?,
            "reports": reports,
        }));
    }
    Ok(json!({ "radius": radius, "rows": rows }))
}

#[wasm_bindgen]
pub fn warp_profile(toml: &str, points: usize) -> std::result::Result<String, JsError> {
    to_js(warp_profile_json(toml, points))
}

#[wasm_bindgen]
pub fn spectrum(toml: &str) -> std::result::Result<String, JsError> {
    to_js(spectrum_json(toml))
}

#[wasm_bindgen]
pub fn dirac_table(max_dim: usize, radius: f64, n: usize) -> std::result::Result<String, JsError> {
    to_js(dirac_table_json(max_dim, radius, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BUMP: &str = "task = \"spectrum\"\n[base]\ntype = \"circle\"\nlength = 6.283185307179586\n[fiber]\ntype = \"circle\"\nlength = 6.283185307179586\n[warp]\nfamily = \"cosine_bump\"\na = 1.0\nb = 0.25\n[solver]\nn = 128\n";

    #[test]
    fn profile_tracks_the_bump() {
        let v = warp_profile_json(BUMP, 64).unwrap();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 64);
        assert!((v["warp_max"].as_f64().unwrap() - 1.25).abs() < 1e-3);
        for r in rows {
            let f = r["f"].as_f64().unwrap();
            assert!((r["fiber_potential"].as_f64().unwrap() - 1.0 / (f * f)).abs() < 1e-12);
        }
    }

    #[test]
    fn profile_rejects_unknown_keys() {
        assert!(warp_profile_json(&format!("{BUMP}bogus = 1\n"), 8).is_err());
    }
}
