use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mmframe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmframe")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_config(dir: &TempDir, extra: &str) -> std::path::PathBuf {
    let path = dir.path().join("cfg.json");
    let body = format!(
        r#"{{"T": 4, "R": 4, "M_T": 2, "M_R": 4, "G_T": 6, "G_R": 6, "L": 1,
            "trials": 4, "snr_grid_db": [0, 20], "frame_design": "HARMONIC"{extra}}}"#
    );
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn design_factor_profile_chain() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(&dir, "");
    let frame = dir.path().join("frame.json");
    let report = dir.path().join("report.json");
    let out = mmframe(&["design-frame", "--config", path_str(&cfg), "--out", path_str(&frame), "--report", path_str(&report)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&frame).unwrap()).unwrap();
    assert_eq!((m["rows"].as_u64(), m["cols"].as_u64()), (Some(8), Some(16)));
    let energy: f64 = m["entries"].as_array().unwrap().iter().map(|e| e[0].as_f64().unwrap().powi(2) + e[1].as_f64().unwrap().powi(2)).sum();
    assert!((energy - 16.0).abs() < 1e-9);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["stages"].as_array().unwrap().len(), 4);

    let pair = dir.path().join("pair.json");
    let out = mmframe(&["factor", "--in", path_str(&frame), "--dims", "4,4,2,4", "--out", path_str(&pair)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let p: serde_json::Value = serde_json::from_str(&fs::read_to_string(&pair).unwrap()).unwrap();
    assert!(p["approx_error"].as_f64().unwrap() >= 0.0);

    let profile = dir.path().join("profile.csv");
    let out = mmframe(&["coherence-profile", "--in", path_str(&frame), "--bins", "16", "--out", path_str(&profile)]);
    assert!(out.status.success());
    let csv = fs::read_to_string(&profile).unwrap();
    assert_eq!(csv.lines().next(), Some("bin_center,count,empirical_cdf"));
    assert_eq!(csv.lines().count(), 17);
    let total: usize = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 16 * 15 / 2);
}

#[test]
fn sweeps_write_tables() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(&dir, r#", "solvers": ["OMP"]"#);
    let sweep = dir.path().join("sweep.csv");
    let records = dir.path().join("records.jsonl");
    let out = mmframe(&["nmse-sweep", "--config", path_str(&cfg), "--out", path_str(&sweep), "--records", path_str(&records), "--workers", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(&sweep).unwrap().lines().count(), 1 + 2);
    assert_eq!(fs::read_to_string(&records).unwrap().lines().count(), 4 * 2);

    let aspect = dir.path().join("aspect.csv");
    let out = mmframe(&["aspect-sweep", "--config", path_str(&cfg), "--pairs", "2x4,4x2,1x8", "--out", path_str(&aspect)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(&aspect).unwrap().lines().count(), 1 + 3 * 2);
}

#[test]
fn invalid_config_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("wide.json");
    fs::write(&cfg, r#"{"T": 4, "R": 4, "M_T": 8, "M_R": 4, "G_T": 6, "G_R": 6, "L": 1}"#).unwrap();
    let out = mmframe(&["nmse-sweep", "--config", path_str(&cfg), "--out", path_str(&dir.path().join("x.csv"))]);
    assert_eq!(out.status.code(), Some(2));

    let zero = dir.path().join("zero.json");
    fs::write(&zero, r#"{"T": 4, "R": 4, "M_T": 2, "M_R": 4, "G_T": 6, "G_R": 6, "L": 1, "trials": 0}"#).unwrap();
    let out = mmframe(&["nmse-sweep", "--config", path_str(&zero), "--out", path_str(&dir.path().join("x.csv"))]);
    assert_eq!(out.status.code(), Some(2));

    let out = mmframe(&["aspect-sweep", "--config", path_str(&zero), "--pairs", "4by4", "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_dims_and_missing_files() {
    let dir = TempDir::new().unwrap();
    let frame = dir.path().join("frame.json");
    fs::write(&frame, r#"{"rows": 2, "cols": 2, "entries": [[1,0],[0,0],[0,0],[1,0]]}"#).unwrap();
    let out = mmframe(&["factor", "--in", path_str(&frame), "--dims", "4,4,2,2", "--out", path_str(&dir.path().join("p.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let out = mmframe(&["coherence-profile", "--in", path_str(&dir.path().join("missing.json")), "--out", "x.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_dims_are_a_usage_error() {
    let out = mmframe(&["factor", "--in", "frame.json", "--dims", "8,8,x,4", "--out", "p.json"]);
    assert_eq!(out.status.code(), Some(2));
}
