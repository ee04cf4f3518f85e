use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wgmaxwell-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgmaxwell")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: serde_json::Value) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body.to_string()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn converge_writes_report_and_plot() {
    let dir = scratch("converge");
    let cfg = write_config(
        &dir,
        serde_json::json!({
            "kind": "electric", "case": "electric-trig", "k": 1, "levels": [4, 8],
            "output": dir.join("out"), "plot": true
        }),
    );
    let out = run(&["converge", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("out/report.csv")).unwrap();
    assert!(csv.starts_with("# "));
    assert_eq!(csv.lines().count(), 4);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    assert!(std::fs::read_to_string(dir.join("out/plot.svg")).unwrap().contains("<svg"));
}

#[test]
fn unmet_threshold_exits_one() {
    let dir = scratch("threshold");
    let cfg = write_config(
        &dir,
        serde_json::json!({
            "kind": "magnetic", "case": "magnetic-trig", "k": 1, "levels": [2, 4],
            "output": dir.join("out"),
            "thresholds": {"energy": 5.0, "multiplier": 5.0, "l2": 5.0, "edge": 5.0}
        }),
    );
    assert_eq!(run(&["converge", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn bad_config_exits_two() {
    let dir = scratch("bad");
    let cfg = write_config(&dir, serde_json::json!({"kind": "electric", "case": "nope", "k": 1, "levels": [2, 4]}));
    let out = run(&["converge", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let cfg = write_config(&dir, serde_json::json!({"kind": "electric", "case": "electric-trig", "k": 1, "levels": [4], "extra": 1}));
    assert_eq!(run(&["converge", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(run(&["converge", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
}

#[test]
fn zero_conductivity_exits_two() {
    let dir = scratch("sigma");
    let cfg = write_config(
        &dir,
        serde_json::json!({"kind": "electric", "case": "electric-trig", "k": 1, "levels": [2, 4], "sigma": 0.0, "output": dir.join("out")}),
    );
    assert_eq!(run(&["converge", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn probes_write_json() {
    let dir = scratch("probes");
    let cfg = write_config(
        &dir,
        serde_json::json!({
            "kind": "magnetic", "case": "magnetic-trig", "k": 1, "levels": [2, 4],
            "output": dir.join("out"), "coercivity_samples": 20, "witness_samples": 5, "commutativity_cells": 10
        }),
    );
    let out = run(&["probes", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/probes.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
}

#[test]
fn solve_dumps_system() {
    let dir = scratch("solve");
    let cfg = write_config(
        &dir,
        serde_json::json!({"kind": "electric", "case": "electric-trig", "k": 1, "levels": [2], "output": dir.join("out")}),
    );
    let dump = dir.join("system.mtx");
    let out = run(&["solve", "--config", &cfg, "--dump-system", dump.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mtx = std::fs::read_to_string(&dump).unwrap();
    assert!(mtx.starts_with("%%MatrixMarket matrix coordinate complex"));
    let rhs = std::fs::read_to_string(dir.join("system.mtx.rhs")).unwrap();
    assert!(rhs.starts_with("%%MatrixMarket matrix array complex"));
}
