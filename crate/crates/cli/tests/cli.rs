use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_warpspec"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], config: &Path) -> Output {
    bin()
        .arg("--config")
        .arg(config)
        .args(args)
        .output()
        .unwrap()
}

fn write_config(name: &str, text: &str) -> PathBuf {
    let p = scratch("configs").join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn sphere_verify_exits_zero_without_strict() {
    let out = run(&[], &configs().join("sphere_verify.toml"));
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["name"], "Thm4-stated");
    assert_eq!(lines[0]["verdict"], "violated");
    assert_eq!(lines[1]["verdict"], "holds");
}

#[test]
fn strict_flag_turns_violation_into_exit_three() {
    let out = run(&["--strict"], &configs().join("sphere_verify.toml"));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn strict_without_violation_exits_zero() {
    let out = run(&["--strict"], &configs().join("converge_base.toml"));
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn unknown_key_is_a_config_error() {
    let p = write_config(
        "typo.toml",
        "task = \"verify\"\n[model]\ntype = \"round_sphere\"\ndim = 2\nradius = 1.0\nradus = 2.0\n",
    );
    let out = run(&[], &p);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("radus"));
}

#[test]
fn missing_file_and_bad_values_exit_one() {
    assert_eq!(
        run(&[], Path::new("/nonexistent/run.toml")).status.code(),
        Some(1)
    );
    let p = write_config(
        "negative.toml",
        "task = \"spectrum\"\n[base]\ntype = \"circle\"\nlength = -1.0\n",
    );
    assert_eq!(run(&[], &p).status.code(), Some(1));
}

#[test]
fn output_is_byte_identical_across_runs_and_workers() {
    let cfg = configs().join("bump_sweep.toml");
    let a = run(&["--workers", "1"], &cfg);
    let b = run(&["--workers", "4"], &cfg);
    let c = run(&["--workers", "4"], &cfg);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(b.stdout, c.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap().lines().count(), 8);
}

#[test]
fn csv_goes_to_output_file() {
    let path = scratch("out").join("sphere.csv");
    let out = run(
        &["--format", "csv", "--output", path.to_str().unwrap()],
        &configs().join("sphere_verify.toml"),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(header.contains(&"margin") && header.contains(&"verdict"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn config_hash_tracks_content() {
    let a = write_config(
        "h1.toml",
        "task = \"verify\"\n[model]\ntype = \"round_sphere\"\ndim = 2\nradius = 1.0\n",
    );
    let b = write_config(
        "h2.toml",
        "task = \"verify\"\n\n[model]\nradius = 1.0\ndim = 2\ntype = \"round_sphere\"\n",
    );
    let c = write_config(
        "h3.toml",
        "task = \"verify\"\n[model]\ntype = \"round_sphere\"\ndim = 3\nradius = 1.0\n",
    );
    let hash = |p: &Path| {
        let out = run(&[], p);
        let first = String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        serde_json::from_str::<serde_json::Value>(&first).unwrap()["config_hash"]
            .as_str()
            .unwrap()
            .to_string()
    };
    assert_eq!(hash(&a), hash(&b));
    assert_ne!(hash(&a), hash(&c));
}
