use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn pts(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pts"))
        .args(args)
        .arg("--out_dir")
        .arg(dir)
        .env_remove("PTS_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn free_scatter_is_transparent() {
    let tmp = TempDir::new().unwrap();
    let o = pts(tmp.path(), &["scatter", "--n", "0", "--k_values", "0.1,1,10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(tmp.path().join("scatter.csv")).unwrap();
    for (re, im) in column(&csv, "t_re").into_iter().zip(column(&csv, "t_im")) {
        assert_eq!((re, im), (1.0, 0.0));
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("scatter_report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["command"], "scatter");
}

#[test]
fn non_integer_strength_has_unit_flux() {
    let tmp = TempDir::new().unwrap();
    let o = pts(tmp.path(), &["scatter", "--lambda", "2.5"]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(tmp.path().join("scatter.csv")).unwrap();
    for f in column(&csv, "flux") {
        assert!((f - 1.0).abs() < 1e-10);
    }
}

#[test]
fn bad_configuration_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&pts(tmp.path(), &["scatter", "--no_such_key", "1"])), 2);
    assert_eq!(code(&pts(tmp.path(), &["scatter", "--p", "-1"])), 2);
    let file = tmp.path().join("run.conf");
    fs::write(&file, "n = 2\nwhatever = 3\n").unwrap();
    assert_eq!(code(&pts(tmp.path(), &["scatter", "--config", file.to_str().unwrap()])), 2);
    assert_eq!(code(&pts(tmp.path(), &["bank", "--battery", "nope"])), 2);
}

#[test]
fn unmet_preconditions_exit_with_three() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&pts(tmp.path(), &["bank", "--lambda", "2.5"])), 3);
    let o = pts(tmp.path(), &["evolve", "--times", "0,30"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("domain too small"));
}

#[test]
fn failed_check_exits_with_one() {
    let tmp = TempDir::new().unwrap();
    let o = pts(tmp.path(), &["bound", "--residual_tol", "1e-30"]);
    assert_eq!(code(&o), 1);
    let report: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("bound_report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn config_file_flags_and_environment_layer() {
    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("run.conf");
    fs::write(&file, "# level three\nn = 3\nk_values = 1\nout_dir = ignored\n").unwrap();
    let env_dir = tmp.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_pts"))
        .args(["bound", "--config", file.to_str().unwrap()])
        .env("PTS_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(env_dir.join("bound.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    // a flag beats both the file and the environment
    let flag_dir = tmp.path().join("from-flag");
    let o = Command::new(env!("CARGO_BIN_EXE_pts"))
        .args(["bound", "--config", file.to_str().unwrap(), "--n", "1", "--out_dir", flag_dir.to_str().unwrap()])
        .env("PTS_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(flag_dir.join("bound.csv")).unwrap().lines().count(), 2);
}

#[test]
fn kernel_cache_hit_is_bit_identical() {
    let tmp = TempDir::new().unwrap();
    let args = ["kernel", "--kernel_points", "201", "--band", "2"];
    let first = pts(tmp.path(), &args);
    assert_eq!(code(&first), 0);
    assert!(String::from_utf8_lossy(&first.stderr).contains("built"));
    let csv = fs::read(tmp.path().join("kernel_j2.csv")).unwrap();
    let cached: Vec<_> = fs::read_dir(tmp.path().join("cache")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(cached.len(), 1);
    let blob = fs::read(&cached[0]).unwrap();
    let second = pts(tmp.path(), &args);
    assert_eq!(code(&second), 0);
    assert!(String::from_utf8_lossy(&second.stderr).contains("cache hit"));
    assert_eq!(fs::read(tmp.path().join("kernel_j2.csv")).unwrap(), csv);
    assert_eq!(fs::read(&cached[0]).unwrap(), blob);
    // another band is a different cache entry
    assert_eq!(code(&pts(tmp.path(), &["kernel", "--kernel_points", "201", "--band", "1"])), 0);
    assert_eq!(fs::read_dir(tmp.path().join("cache")).unwrap().count(), 2);
}

#[test]
fn norm_output_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["norm", "--top", "3", "--battery", "gauss-w1-c0,bound-1", "--family", "B", "--p", "1"];
    assert_eq!(code(&pts(a.path(), &args)), 0);
    let mut with_workers = args.to_vec();
    with_workers.extend(["--workers", "1"]);
    assert_eq!(code(&pts(b.path(), &with_workers)), 0);
    let norm = fs::read(a.path().join("norm.json")).unwrap();
    assert_eq!(norm, fs::read(b.path().join("norm.json")).unwrap());
    let records: serde_json::Value = serde_json::from_slice(&norm).unwrap();
    assert_eq!(records.as_array().unwrap().len(), 2);
    for key in ["spec", "function_id", "norm", "ratios"] {
        assert!(records[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn verify_runs_a_subset() {
    let tmp = TempDir::new().unwrap();
    let o = pts(tmp.path(), &["verify", "--criteria", "1,3", "--n", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(doc["pass"], true);
    let ids: Vec<&str> = doc["checks"].as_array().unwrap().iter().map(|c| c["check_id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"verify.abs_t_at_1.n2"));
    assert!(ids.iter().any(|i| i.starts_with("c01.")));
    assert!(ids.iter().any(|i| i.starts_with("c03.")));
    assert!(!ids.iter().any(|i| i.starts_with("c02.")));
    for c in doc["checks"].as_array().unwrap() {
        for key in ["check_id", "paper_anchor", "value", "threshold", "pass"] {
            assert!(c.get(key).is_some());
        }
    }
}
