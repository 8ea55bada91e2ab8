use warpspec_web::{dirac_table_json, spectrum_json, warp_profile_json};

const SPHERE: &str = "task = \"verify\"\n[model]\ntype = \"round_sphere\"\ndim = 3\nradius = 2.0\n";

#[test]
fn sphere_spectrum_reports_both_bounds() {
    let v = spectrum_json(SPHERE).unwrap();
    assert!((v["dirac_lambda1"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    let verdicts: Vec<&str> = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["verdict"].as_str().unwrap())
        .collect();
    assert_eq!(verdicts, ["violated", "holds"]);
}

#[test]
fn product_spectrum_has_summary_and_reports() {
    let toml = "task = \"spectrum\"\n[base]\ntype = \"interval\"\nlength = 3.0\n[fiber]\ntype = \"round_sphere\"\ndim = 2\n[warp]\nfamily = \"constant\"\na = 1.5\n[solver]\nn = 128\n";
    let v = spectrum_json(toml).unwrap();
    let l1 = v["summary"]["lambda1_m"]["value"].as_f64().unwrap();
    let expect = (std::f64::consts::PI / 3.0).powi(2).min(2.0 / 2.25);
    assert!((l1 - expect).abs() < 1e-5, "{l1} vs {expect}");
    // the fiber mode 2/2.25 undercuts (pi/3)^2, so the lower bounds (constant warp: c = 0) fail
    for r in v["reports"].as_array().unwrap() {
        let lower = r["name"].as_str().unwrap().starts_with("Thm1-lower");
        assert_eq!(
            r["verdict"],
            if lower { "violated" } else { "holds" },
            "{r}"
        );
    }
}

#[test]
fn dirac_table_quartered_margin_is_n_over_four() {
    let v = dirac_table_json(5, 1.0, 128).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        let n = r["dim"].as_f64().unwrap();
        let q = &r["reports"][1];
        assert_eq!(q["name"], "Thm4-quartered");
        assert!((q["margin"].as_f64().unwrap() - n / 4.0).abs() < 1e-6);
    }
}

#[test]
fn errors_carry_the_config_message() {
    let err = warp_profile_json("task = \"spectrum\"\n", 16).unwrap_err();
    assert!(err.to_string().contains("[base]"));
}
