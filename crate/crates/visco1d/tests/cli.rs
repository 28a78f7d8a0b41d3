//! End-to-end checks of the binary: exit codes, validation messages,
//! inspect-model output, and override handling.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_visco1d")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

#[test]
fn run_on_equilibrium_exits_zero_with_flat_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("eq.toml"),
        "[grid]\ncells = 32\n\n[control]\nt_end = 0.5\n\n[initial]\namplitude = 0.0\nv_amplitude = 0.0\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["run", "--config", "eq.toml", "--out", "out"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let series = std::fs::read_to_string(dir.path().join("out/series.csv")).unwrap();
    for line in series.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        // E, D, stress defect all identically zero on the equilibrium
        assert_eq!(cols[1], 0.0);
        assert_eq!(cols[3], 0.0);
        assert_eq!(cols[11], 0.0);
    }
}

#[test]
fn validation_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[phys]\na = 1.5\n").unwrap();
    let out = run_in(dir.path(), &["run", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("a must lie in [-1,1]"), "{err}");
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[phys]\nggamma = 1.4\n").unwrap();
    let out = run_in(dir.path(), &["run", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_tau_with_two_values_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("two.toml"),
        "[grid]\ncells = 32\n\n[experiment]\ntaus = [0.1, 0.05]\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["sweep-tau", "--config", "two.toml", "--out", "out"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("at least 3"), "{err}");
}

#[test]
fn inadmissible_initial_data_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    // amplitude 2 with the default family makes v0 dip below zero
    std::fs::write(
        dir.path().join("blow.toml"),
        "[grid]\ncells = 32\n\n[control]\nt_end = 1.0\n\n[initial]\namplitude = 2.0\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["run", "--config", "blow.toml", "--out", "out"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("v0"));
}

#[test]
fn breakdown_exits_3_and_writes_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // admissible at t = 0, loses the stress margin mid-run
    std::fs::write(
        dir.path().join("blow.toml"),
        "[grid]\ncells = 128\n\n[control]\nt_end = 2.0\n\n[initial]\namplitude = 10.0\nv_amplitude = 0.9\npreparation = \"ill-prepared\"\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["run", "--config", "blow.toml", "--out", "out"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap();
    let val: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert!(!val["breakdown"].is_null());
    let time = val["breakdown"]["time"].as_f64().unwrap();
    assert!(time > 0.0 && time < 2.0, "breakdown time {time}");
    // partial series was still written
    assert!(dir.path().join("out/series.csv").exists());
}

#[test]
fn inspect_model_prints_speeds_and_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["inspect-model"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("A0"), "{text}");
    assert!(text.contains("admissible: true"), "{text}");
    // default parameters at rest: +/- sqrt(1.4 + 10) = 3.37638...
    let want = 11.4f64.sqrt();
    let speeds = parse_speeds(&text);
    assert!((speeds[0] + want).abs() < 1e-12);
    assert!(speeds[1].abs() < 1e-12);
    assert!((speeds[2] - want).abs() < 1e-12);
}

#[test]
fn set_overrides_reach_the_solver() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "inspect-model",
            "--set",
            "phys.tau=0.025",
            "--set",
            "phys.gamma=2.0",
        ],
    );
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    // sqrt(2 + 1/0.025) = sqrt(42)
    let want = 42.0f64.sqrt();
    let speeds = parse_speeds(&text);
    assert!((speeds[2] - want).abs() < 1e-12, "{text}");
}

fn parse_speeds(text: &str) -> [f64; 3] {
    let line = text
        .lines()
        .find(|l| l.starts_with("characteristic speeds:"))
        .expect("speeds line");
    let nums: Vec<f64> = line
        .trim_start_matches("characteristic speeds:")
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    [nums[0], nums[1], nums[2]]
}

#[test]
fn regime_warning_emitted_but_run_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("warn.toml"),
        "[phys]\ntau = 0.5\nmu = 0.6\n\n[grid]\ncells = 32\n\n[control]\nt_end = 0.5\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["run", "--config", "warn.toml", "--out", "out"]);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("regime warning"), "{err}");
    // warning is also part of the summary echo
    let summary = std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap();
    assert!(summary.contains("regime warning"));
}

#[test]
fn run_ns_writes_limit_stress_series() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("ns.toml"),
        "[grid]\ncells = 64\n\n[control]\nt_end = 0.5\n\n[initial]\namplitude = 1e-3\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["run-ns", "--config", "ns.toml", "--out", "out"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap();
    let val: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(val["experiment"], "run-ns");
    assert_eq!(val["schema_version"], 1);
    // the limit closure S0 = mu_eff D(u)/v makes the defect column zero
    let series = std::fs::read_to_string(dir.path().join("out/series.csv")).unwrap();
    for line in series.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        assert_eq!(cols[11], 0.0);
    }
}

#[test]
fn converge_reports_orders() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("conv.toml"),
        "[grid]\ncells = 64\n\n[control]\nt_end = 0.25\n\n[initial]\namplitude = 1e-3\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["converge", "--config", "conv.toml", "--out", "out"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let val: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap())
            .unwrap();
    let order = val["report"]["order_u"].as_f64().unwrap();
    assert!((1.5..=2.5).contains(&order), "order {order}");
    // bad solver name is a validation error
    let out = run_in(
        dir.path(),
        &["converge", "--solver", "spectral", "--config", "conv.toml"],
    );
    assert_eq!(out.status.code(), Some(2));
}
