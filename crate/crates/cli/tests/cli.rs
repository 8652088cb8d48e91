use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn distant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distant"))
        .args(args)
        .env_remove("DISTANT_OUT_DIR")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn dump(name: &str) -> Value {
    let o = distant(&["presets", "dump", name]);
    assert_eq!(code(&o), 0);
    serde_json::from_slice(&o.stdout).unwrap()
}

/// Flight preset cut down to a short straight route and a one-hour thermal case.
fn quick(dir: &Path, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v = dump("flight");
    v["route"]["path"] = serde_json::json!({"straight": {"length_m": 30.0, "heading_rad": 0.0}});
    v["thermal"]["duration_s"] = 3600.0.into();
    v["calibration"] = Value::Null;
    edit(&mut v);
    let path = dir.join("scenario.json");
    fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path
}

#[test]
fn presets_list_and_dump() {
    let o = distant(&["presets", "list"]);
    assert_eq!(code(&o), 0);
    let names: Vec<String> = String::from_utf8(o.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(names, ["flight", "breadboard_1_3", "paper_nominal"]);
    let bb = dump("breadboard_1_3");
    assert!((bb["rover"]["layout"]["wheel_radius"].as_f64().unwrap() - 0.35 / 3.0).abs() < 1e-12);
    assert_eq!(code(&distant(&["presets", "dump", "rover9"])), 2);
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = quick(dir.path(), |_| {});
    let o = distant(&["validate", ok.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let big = quick(dir.path(), |v| v["rover"]["layout"]["wheel_radius"] = 0.40.into());
    let o = distant(&["validate", big.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("wheel_radius") && err.contains("0.35"), "{err}");

    let typo = quick(dir.path(), |v| v["rover"]["layout"]["wheel_diamter"] = 0.7.into());
    let o = distant(&["validate", typo.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("wheel_diamter"));
}

#[test]
fn run_writes_outputs_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(dir.path(), |_| {});
    let out = dir.path().join("out");
    let o = distant(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    for f in ["traverse.csv", "thermal.csv", "summary.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 5);
    assert_eq!(summary["exit_code"], 0);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(dir.path(), |_| {});
    let out = dir.path().join("env_out");
    let o = Command::new(env!("CARGO_BIN_EXE_distant"))
        .args(["run", cfg.to_str().unwrap()])
        .env("DISTANT_OUT_DIR", &out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(out.join("summary.json").exists());
}

#[test]
fn verdict_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // heavy rover pushes wheel torque above the envelope
    let cfg = quick(dir.path(), |v| v["rover"]["mass_kg"] = 400.0.into());
    let out = dir.path().join("out");
    let o = distant(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stdout).unwrap().contains("FAIL wheel_torque"));
}

#[test]
fn runtime_abort_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(dir.path(), |v| {
        v["terrain"]["surface"] = serde_json::json!({"incline": {"slope_rad": 1.2, "cross_slope_rad": 0.0}});
    });
    let out = dir.path().join("out");
    let o = distant(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let rec: Value = serde_json::from_str(&fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(rec["exit_code"], 3);
    assert_eq!(rec["step_index"], 0);
}

#[test]
fn preset_and_config_are_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(dir.path(), |_| {});
    let out = dir.path().join("out");
    let o = distant(&["run", cfg.to_str().unwrap(), "--preset", "flight", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&distant(&["run", "--out", out.to_str().unwrap()])), 2);
}

#[test]
fn sweep_and_empty_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(dir.path(), |_| {});
    let out = dir.path().join("sweep");
    let o = distant(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--param",
        "rover.mass_kg",
        "--values",
        "230,240",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.lines().nth(1).unwrap().starts_with("230,0,"));

    let empty = dir.path().join("empty");
    let o = distant(&["sweep", cfg.to_str().unwrap(), "--param", "rover.mass_kg", "--values", "", "--out", empty.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(empty.join("sweep.csv")).unwrap().lines().count(), 1);

    let o = distant(&["sweep", cfg.to_str().unwrap(), "--param", "rover.mas", "--values", "1", "--out", empty.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("mass_kg"));
}

#[test]
fn scale_writes_loadable_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(dir.path(), |_| {});
    let out = dir.path().join("third.json");
    let o = distant(&["scale", cfg.to_str().unwrap(), "--factor", "0.3333333333333333", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!((v["thermal"]["node"]["radiating_area"].as_f64().unwrap() - 0.05556).abs() < 5e-6);
    assert_eq!(code(&distant(&["validate", out.to_str().unwrap()])), 0);
    assert_eq!(code(&distant(&["scale", cfg.to_str().unwrap(), "--factor", "-1", "--out", out.to_str().unwrap()])), 2);
}
