use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use subfinsler_cli::config::RunConfig;
use subfinsler_cli::{execute, Command as Cmd, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_subfinsler"))
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn default_identities_pass() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ids.csv");
    let o = run(&["check-identities", "--out", out.to_str().unwrap(), "--samples", "60"]);
    assert_eq!(code(&o), EXIT_PASS, "{}", String::from_utf8_lossy(&o.stdout));
    let j = read_json(&dir.path().join("ids.json"));
    assert_eq!(j["command"], "check-identities");
    assert_eq!(j["pass"], true);
    assert_eq!(j["sample_count"], 60);
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# subfinsler check-identities"));
    assert!(lines.next().unwrap().starts_with("suite,x0,"));
}

#[test]
fn anisotropic_yamabe_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        r#"{"norm_pair": "ellipsoid-pnorm4", "params": {"m": 2, "k": 2}, "epsilon": 0.5, "sigma0": "random"}"#,
    );
    let out = dir.path().join("y.csv");
    let o = run(&["verify-yamabe", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_PASS, "{}", String::from_utf8_lossy(&o.stdout));
    let j = read_json(&dir.path().join("y.json"));
    let suites: Vec<&str> = j["suites"].as_array().unwrap().iter().map(|s| s["suite"].as_str().unwrap()).collect();
    for s in ["yamabe", "yamabe_fd", "lemma_operator", "magic", "intertwining", "translation"] {
        assert!(suites.contains(&s), "missing {s} in {suites:?}");
    }
}

#[test]
fn summary_goes_to_stdout_without_out_path() {
    let o = run(&["wulff", "--samples", "10"]);
    assert_eq!(code(&o), EXIT_CONFIG);
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "w.json", r#"{"params": {"m": 2, "k": 1}, "norm_pair": "pnorm4"}"#);
    let o = run(&["wulff", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_PASS);
    let text = String::from_utf8(o.stdout).unwrap();
    let start = text.find('{').unwrap();
    let j: Value = serde_json::from_str(&text[start..]).unwrap();
    assert_eq!(j["suites"][0]["suite"], "wulff_phi");
}

#[test]
fn wulff_polyline_is_closed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "w.json",
        r#"{"params": {"m": 1, "k": 1}, "wulff": {"curve": "gauge", "points": 36}}"#,
    );
    let out = dir.path().join("curve.csv");
    let o = run(&["wulff", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_PASS);
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(2)
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 37);
    assert_eq!(rows[0], rows[36]);
    for r in &rows {
        // z⁴ + 16σ² = 1 on the Euclidean α = 1 slice
        assert!((r[0].powi(4) + 16.0 * r[1] * r[1] - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    for (name, body) in [
        ("unknown.json", r#"{"colour": 1}"#),
        ("norm.json", r#"{"norm_pair": "taxicab"}"#),
        ("eps.json", r#"{"epsilon": -1}"#),
        ("sigma.json", r#"{"sigma0": [1, 2, 3]}"#),
        ("tol.json", r#"{"tolerances": {"yamabe": 0}}"#),
        ("alpha.json", r#"{"params": {"alpha": 2}}"#),
    ] {
        let cfg = write_config(dir.path(), name, body);
        let o = run(&["verify-yamabe", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code(&o), EXIT_CONFIG, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = run(&["verify-yamabe", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(code(&o), EXIT_CONFIG);
    let o = run(&["no-such-command"]);
    assert_eq!(code(&o), EXIT_CONFIG);
}

#[test]
fn output_next_to_config_is_refused() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "run.json", "{}");
    let out = dir.path().join("run.csv");
    let o = run(&["check-identities", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_CONFIG);
    assert_eq!(std::fs::read_to_string(&cfg).unwrap(), "{}");
}

#[test]
fn impossible_tolerance_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "cfg.json", r#"{"tolerances": {"yamabe_fd": 1e-20}}"#);
    let out = dir.path().join("out.csv");
    let o = run(&["verify-yamabe", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_FAIL);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL yamabe_fd"));
    assert_eq!(read_json(&dir.path().join("out.json"))["pass"], false);
}

#[test]
fn fundamental_cases_from_config() {
    let cfg = RunConfig::from_json(
        r#"{"norm_pair": "ellipsoid", "params": {"m": 2, "k": 1},
            "fundamental": [{"alpha": 2, "p": 3}, {"alpha": 1, "p": "Q"}], "sample_count": 50}"#,
    )
    .unwrap();
    let out = execute(Cmd::VerifyFundamental, &cfg).unwrap();
    assert!(out.passed());
    let names: Vec<&str> = out.reports.iter().map(|r| r.suite.as_str()).collect();
    assert!(names.contains(&"fundamental_alpha2_p3"));
    assert!(names.contains(&"fundamental_alpha1_p4"));
    assert!(RunConfig::from_json(r#"{"fundamental": [{"alpha": 1, "p": "R"}]}"#)
        .and_then(|c| execute(Cmd::VerifyFundamental, &c))
        .is_err());
}

#[test]
fn zero_energy_passes() {
    let cfg = RunConfig::from_json(r#"{"energy": {"function": "zero", "points_per_axis": 8}}"#).unwrap();
    let out = execute(Cmd::Energy, &cfg).unwrap();
    assert!(out.passed());
    assert_eq!(out.extras["energy"], 0.0);
}

#[test]
fn energy_rejects_large_dimension_and_budget() {
    let cfg = RunConfig::from_json(r#"{"params": {"m": 3, "k": 3}}"#).unwrap();
    assert_eq!(execute(Cmd::Energy, &cfg).unwrap_err().exit_code(), EXIT_CONFIG);
    let cfg = RunConfig::from_json(r#"{"energy": {"budget": 1000}}"#).unwrap();
    assert_eq!(execute(Cmd::Energy, &cfg).unwrap_err().exit_code(), EXIT_CONFIG);
}
