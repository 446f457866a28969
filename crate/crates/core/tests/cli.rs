use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use faber_tietz::io::{run, ExperimentConfig, RunOverrides, RunReport, CHECKS};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_faber-tietz")).args(args).output().expect("binary runs")
}

fn run_into(name: &str, out: &Path) -> Output {
    cli(&["run", config(name).to_str().unwrap(), "--out-dir", out.to_str().unwrap()])
}

#[test]
fn list_checks_names_every_check() {
    let out = cli(&["list-checks"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for c in &CHECKS {
        assert!(text.contains(c.id), "{} missing", c.id);
    }
}

#[test]
fn passing_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into("sphere_identity.toml", dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let coefficients = std::fs::read_to_string(dir.path().join("coefficients.csv")).unwrap();
    assert!(coefficients.starts_with("tag,k,m,re,im\n"));
    // α^3_1 has coefficient one
    let row = coefficients.lines().find(|l| l.starts_with("alpha,1,3,")).unwrap();
    let re: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((re - 1.0).abs() < 1e-10);
    let residuals = std::fs::read_to_string(dir.path().join("residuals.csv")).unwrap();
    assert!(residuals.starts_with("M,l2_residual,sup_error\n"));
    assert_eq!(residuals.lines().count(), 5);
}

#[test]
fn report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let overrides = RunOverrides { out_dir: Some(dir.path().to_path_buf()), seed: Some(21), strict: false };
    let report = run(&config("sphere_identity.toml"), &overrides).unwrap();
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let back: RunReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.seed, 21);
    assert!(back.passed);
    assert_eq!(back.checks.len(), CHECKS.len());
    // the recorded config reproduces itself
    let again = ExperimentConfig::from_toml(&back.config.to_toml()).unwrap();
    assert_eq!(again, back.config);
}

#[test]
fn runs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(run_into("sphere_joukowski.toml", d.path()).status.code(), Some(0));
    }
    for file in ["coefficients.csv", "residuals.csv"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file} differs between runs");
    }
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into("fail_truncation.toml", dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL convergence"));
}

#[test]
fn config_error_exits_two_and_names_the_field() {
    let out = cli(&["run", config("fail_tau.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("surface.tau"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[surface]\ngenus = 0\nw0 = \"3\"\n[[caps]]\nmap = \"spiral(0)\"\n[target]\nkind = \"faber-alpha\"\ncap = 1\nm = 1\n").unwrap();
    let out = cli(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("caps[1].map"));

    let out = cli(&["run", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_three_with_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into("fail_quadrature.toml", dir.path());
    assert_eq!(out.status.code(), Some(3));
    let report: RunReport = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report.error.unwrap().contains("quadrature"));
    assert!(!report.passed);
}
