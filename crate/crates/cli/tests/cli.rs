use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn sgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgeo")).args(args).output().expect("binary runs")
}

fn config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn check(cfg: &Path, report: &Path, extra: &[&str]) -> (i32, Value) {
    let mut args = vec!["check", cfg.to_str().unwrap(), "--report", report.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = sgeo(&args);
    let code = out.status.code().unwrap();
    let json = std::fs::read_to_string(report).map(|s| serde_json::from_str(&s).unwrap()).unwrap_or(Value::Null);
    (code, json)
}

fn verdict<'a>(report: &'a Value, name: &str) -> &'a str {
    report["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()["verdict"].as_str().unwrap()
}

const CIRCLE: &str = r#"
checks = ["order_one", "orientability"]
seed = 3
[geometry]
kind = "circle"
lambda = 64
"#;

#[test]
fn passing_run_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", CIRCLE);
    let (code, report) = check(&cfg, &dir.path().join("r.json"), &[]);
    assert_eq!(code, 0);
    assert_eq!(report["schema"], "sgeo-report/1");
    assert_eq!(report["summary"]["pass"], 2);
    let pieces = &report["two_pieces"];
    assert_eq!(pieces["eigenvalue_count"], 129);
    assert_eq!(pieces["basis_fingerprint"].as_str().unwrap().len(), 64);
}

#[test]
fn corrupted_dirac_fails_order_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "c.toml",
        r#"
checks = ["order_one"]
[geometry]
kind = "circle"
lambda = 32
corrupt = "dense_D"
"#,
    );
    let (code, report) = check(&cfg, &dir.path().join("r.json"), &[]);
    assert_eq!(code, 1);
    assert_eq!(verdict(&report, "order_one"), "fail");
}

#[test]
fn empty_check_list_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", "checks = []\n[geometry]\nkind = \"circle\"\nlambda = 8\n");
    let (code, report) = check(&cfg, &dir.path().join("r.json"), &[]);
    assert_eq!(code, 0);
    assert_eq!(report["summary"]["total"], 0);
}

#[test]
fn unknown_check_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    // the geometry is large enough that building it first would be noticeable
    let cfg = config(
        dir.path(),
        "c.toml",
        "checks = [\"order_one\", \"no_such_check\"]\n[geometry]\nkind = \"torus\"\np = 3\nlambda = 64\n",
    );
    let report = dir.path().join("r.json");
    let (code, _) = check(&cfg, &report, &[]);
    assert_eq!(code, 2);
    assert!(!report.exists());
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", "[geometry\nkind = ");
    assert_eq!(check(&cfg, &dir.path().join("r.json"), &[]).0, 2);
    assert_eq!(sgeo(&["check", "/nonexistent/sgeo.toml"]).status.code(), Some(2));
}

#[test]
fn reports_repeat_except_for_timing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.toml", CIRCLE);
    let (_, mut a) = check(&cfg, &dir.path().join("a.json"), &["--jobs", "1"]);
    let (_, mut b) = check(&cfg, &dir.path().join("b.json"), &["--jobs", "2"]);
    assert_eq!(a["determinism_hash"], b["determinism_hash"]);
    a.as_object_mut().unwrap().remove("environment");
    b.as_object_mut().unwrap().remove("environment");
    assert_eq!(a, b);
    let (_, c) = check(&cfg, &dir.path().join("c.json"), &["--seed", "4"]);
    assert_ne!(a["determinism_hash"], c["determinism_hash"]);
}

#[test]
fn list_names_targets() {
    let out = sgeo(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in ["circle", "torus", "heat_vs_dixmier", "order_one_break"] {
        assert!(text.contains(needle), "{needle}");
    }
}

#[test]
fn distance_subcommand() {
    let out = sgeo(&["distance", "--geometry", "circle:64", "--from", "0", "--to", "1.5707963267948966"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let lower = v["result"]["lower_bound"].as_f64().unwrap();
    let geodesic = v["geodesic"].as_f64().unwrap();
    assert!(lower <= geodesic * (1.0 + 1e-9) && lower >= 0.9 * geodesic, "{lower} vs {geodesic}");
    let bad = sgeo(&["distance", "--geometry", "circle:64", "--from", "0,0", "--to", "1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn dixmier_subcommand() {
    let out = sgeo(&["dixmier", "--geometry", "circle:128"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["estimate"]["value"].as_f64().unwrap() - 2.0).abs() < 0.05);
    assert_eq!(v["oracle"].as_f64(), Some(2.0));
    assert_eq!(sgeo(&["dixmier", "--geometry", "circle:128", "--p", "2"]).status.code(), Some(2));
}
