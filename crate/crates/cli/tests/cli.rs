// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cpgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpgate")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn single_prints_one_csv_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "single.toml", "fock_cutoff = 1\n");
    let out = cpgate(&["single", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("engine,delta1,delta_cap,mu,gate_time,fidelity"));
    assert!(lines[1].starts_with("schrodinger,10.7,8.4,3.08543729,67.2300828,0.9747034"), "{}", lines[1]);
    assert!(lines[1].ends_with(",ok,"));
}

#[test]
fn degenerate_detunings_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "delta1 = 8.4\ndelta_cap = 8.4\n");
    let out = cpgate(&["single", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn unknown_key_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "typo.toml", "detla1 = 10.0\n");
    assert_eq!(cpgate(&["single", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn missing_config_file_exit_2() {
    assert_eq!(cpgate(&["single", "--config", "/nonexistent/run.toml"]).status.code(), Some(2));
}

#[test]
fn units_report_matches_transmon_example() {
    let out = cpgate(&["units"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let q = v["quality_factor"].as_f64().unwrap();
    let t = v["gate_time_s"].as_f64().unwrap();
    assert!((q - 5988.2).abs() < 0.1, "{q}");
    assert!((t - 125.88e-9).abs() < 1e-11, "{t}");
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
}

#[test]
fn units_rejects_non_positive_frequency() {
    assert_eq!(cpgate(&["units", "--cavity-hz", "0"]).status.code(), Some(2));
}

#[test]
fn fig2_output_independent_of_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "fig2.toml",
        "fock_cutoff = 1\ndelta1_grid = [9.0, 10.7]\ndelta_small_grid = [0.0, 2.3, 3.0]\n",
    );
    let mut runs = Vec::new();
    for jobs in ["1", "3"] {
        let out = dir.path().join(format!("fig2_j{jobs}.csv"));
        let o = cpgate(&["fig2", "--config", &cfg, "--jobs", jobs, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let matrix = dir.path().join(format!("fig2_j{jobs}_matrix.csv"));
        let meta = dir.path().join(format!("fig2_j{jobs}.meta.json"));
        let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(meta).unwrap()).unwrap();
        assert_eq!(meta["rows"], 6);
        assert_eq!(meta["flagged_rows"], 2);
        runs.push((fs::read_to_string(out).unwrap(), fs::read_to_string(matrix).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0].0.lines().count(), 7);
    assert_eq!(runs[0].1.lines().count(), 3);
}

#[test]
fn fig3_row_per_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fig3.toml", "fock_cutoff = 1\nkappa = 0.01\ngamma_grid = [0.0, 1e-3]\n");
    let out = cpgate(&["fig3", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("0,0.01,"));
    assert!(rows[1].starts_with("0.001,0.01,"));
}

#[test]
fn validate_writes_report_and_signals_failures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "validate.toml", "fock_cutoff = 1\n");
    let report = dir.path().join("report.json");
    let out = cpgate(&["validate", "--config", &cfg, "--out", report.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() > 20);
    let failed: Vec<&str> =
        checks.iter().filter(|c| c["status"] == "fail").map(|c| c["check"].as_str().unwrap()).collect();
    // the exit status mirrors the report
    assert_eq!(out.status.code(), Some(if failed.is_empty() { 0 } else { 1 }));
    assert_eq!(v["passed"], failed.is_empty());
    for name in ["projection_identity", "oracle_equivalence", "zero_rate_reduction", "config_round_trip"] {
        assert!(!failed.contains(&name), "{name} failed");
    }
    let stderr = String::from_utf8_lossy(&out.stderr);
    for name in &failed {
        assert!(stderr.contains(name));
    }
}
