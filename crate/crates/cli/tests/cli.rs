//! End-to-end checks of the binary: subcommands, file outputs, exit
//! codes, and output determinism.

use std::path::Path;
use std::process::{Command, Output};

fn nlwr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlwr"))
        .args(args)
        .output()
        .expect("binary must run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL_CONFIG: &str = r#"
scenario = "cli-probe"

[model]
kind = "greenshields"

[domain]
dx = 0.004

[initial]
kind = "riemann"
rho_left = 0.2
rho_right = 0.8

[run]
eps = [0.08, 0.04]
t_end = 0.25
snapshots = 51
dx_ref = 0.002

[window]
x_min = -0.4
x_max = 0.4
"#;

const CONTROL_CONFIG: &str = r#"
scenario = "control-probe"

[model]
kind = "greenshields"

[domain]
dx = 0.004

[initial]
kind = "riemann"
rho_left = 0.8
rho_right = 0.2

[run]
eps = [0.08]
t_end = 2.0
snapshots = 101
dx_ref = 0.002

[window]
x_min = -1.0
x_max = 1.0
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_model_pass_and_fail() {
    let ok = nlwr(&["validate-model", "--kind", "greenshields"]);
    assert!(ok.status.success());
    assert!(stdout(&ok).contains("PASS"));

    // v = 1 − ρ² has a flat top at ρ = 0
    let bad = nlwr(&[
        "validate-model",
        "--kind",
        "custom-polynomial",
        "--params",
        "1,0,-1",
        "--delta-star",
        "0.1",
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("FAIL"));
}

#[test]
fn riemann_prints_wave_structure() {
    let out = nlwr(&["riemann", "0.2", "0.8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("shock 0.2 -> 0.8"), "{text}");
    let speed: f64 = text
        .lines()
        .find_map(|l| l.split("at speed ").nth(1))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(speed.abs() <= 1e-10, "stationary shock expected: {text}");

    let out = nlwr(&["riemann", "0.8", "0.2", "--samples-xi", "5"]);
    assert!(stdout(&out).contains("rarefaction"));
}

#[test]
fn unknown_config_key_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL_CONFIG}\nepsilonn = 1\n"));
    let out = nlwr(&["convergence", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("epsilonn"), "{}", stderr(&out));
}

#[test]
fn run_nonlocal_writes_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CONFIG);
    let out_dir = dir.path().join("out");
    let out = nlwr(&["run-nonlocal", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    for eps in ["0.08", "0.04"] {
        let path = out_dir
            .join("cli-probe")
            .join(format!("eps_{eps}"))
            .join("trajectory.csv");
        assert!(path.exists(), "missing {}", path.display());
    }
}

#[test]
fn convergence_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CONFIG);
    let mut reports = Vec::new();
    for pass in 0..2 {
        let out_dir = dir.path().join(format!("out{pass}"));
        let out = nlwr(&["convergence", &cfg, "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(stdout(&out).contains("verdict:"));
        let report = out_dir.join("cli-probe").join("report.csv");
        let plot = out_dir.join("cli-probe").join("plot.py");
        assert!(report.exists() && plot.exists());
        reports.push(std::fs::read(&report).unwrap());
    }
    assert_eq!(reports[0], reports[1], "byte-identical reports expected");
}

#[test]
fn entropy_audit_negative_control_detects() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONTROL_CONFIG);
    let out_dir = dir.path().join("out");
    let out = nlwr(&[
        "entropy-audit",
        &cfg,
        "--negative-control",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("negative-control-detected"),
        "{}",
        stdout(&out)
    );
    assert!(out_dir.join("control-probe").join("residuals.csv").exists());
}

#[test]
fn io_failure_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CONFIG);
    // /dev/null is a file; creating directories beneath it must fail
    let out = nlwr(&["run-nonlocal", &cfg, "--out", "/dev/null/nested"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn missing_config_file_is_io_failure() {
    let out = nlwr(&["convergence", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(3));
}
