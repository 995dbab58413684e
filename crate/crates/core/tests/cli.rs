use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lrdwave(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrdwave"))
        .args(args)
        .current_dir(cwd)
        .env_remove("LRDWAVE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn simulate_writes_requested_length_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simulate", "--process", "farima", "--d", "0.3", "--n", "10000", "--seed", "7", "-o"];
    let a = lrdwave(&[&args[..], &["a.csv"]].concat(), tmp.path());
    let b = lrdwave(&[&args[..], &["b.csv"]].concat(), tmp.path());
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(code(&b), 0);
    let ta = fs::read_to_string(tmp.path().join("a.csv")).unwrap();
    assert_eq!(ta.lines().count(), 10_001);
    assert_eq!(ta.lines().next(), Some("value"));
    assert_eq!(ta, fs::read_to_string(tmp.path().join("b.csv")).unwrap());
}

#[test]
fn simulate_rejects_out_of_range_d() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lrdwave(&["simulate", "--process", "farima", "--d", "0.6", "--n", "100"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("d"));
}

#[test]
fn simulate_binary_and_benchmark_ids() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lrdwave(&["simulate", "--benchmark", "X6", "--d", "0.2", "--n", "600", "-o", "x.bin"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::metadata(tmp.path().join("x.bin")).unwrap().len(), 8 + 8 * 600);
    let o = lrdwave(&["simulate", "--benchmark", "X99", "--n", "600"], tmp.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn estimate_reports_json_and_variogram() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lrdwave(&["simulate", "--process", "fgn", "--d", "0.2", "--n", "4000", "--seed", "1", "-o", "x.csv"], tmp.path());
    assert_eq!(code(&o), 0);
    let o = lrdwave(&["estimate", "x.csv", "--emit-variogram", "vg.csv"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["d_tilde", "c_tilde", "d_hat_hat", "alpha_hat", "alpha_tilde", "ell1", "ell2", "ci95", "gof_stat", "gof_pvalue", "scales", "log_t_values"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report["estimator"], "WAVELET_PGLS");
    let d = report["d_tilde"].as_f64().unwrap();
    assert!((d - 0.2).abs() < 0.15, "{d}");
    let vg = fs::read_to_string(tmp.path().join("vg.csv")).unwrap();
    assert_eq!(vg.lines().next(), Some("log_a,log_t"));
    assert_eq!(vg.lines().count() - 1, report["ell2"].as_u64().unwrap() as usize);
}

#[test]
fn estimate_whittle_uses_n_over_30() {
    let tmp = tempfile::tempdir().unwrap();
    lrdwave(&["simulate", "--process", "farima", "--d", "0.1", "--n", "3000", "-o", "x.csv"], tmp.path());
    let o = lrdwave(&["estimate", "x.csv", "--estimator", "lw"], tmp.path());
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["estimator"], "LOCAL_WHITTLE");
    assert_eq!(r["bandwidth"], 100);
    let o = lrdwave(&["estimate", "x.csv", "--estimator", "fexp"], tmp.path());
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["estimator"], "FEXP");
}

#[test]
fn estimate_error_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let constant = format!("value\n{}", "2.5\n".repeat(1000));
    fs::write(tmp.path().join("c.csv"), constant).unwrap();
    let o = lrdwave(&["estimate", "c.csv"], tmp.path());
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));

    assert_eq!(code(&lrdwave(&["estimate", "missing.csv"], tmp.path())), 4);

    lrdwave(&["simulate", "--process", "farima", "--n", "200", "-o", "short.csv"], tmp.path());
    assert_eq!(code(&lrdwave(&["estimate", "short.csv"], tmp.path())), 2);

    assert_eq!(code(&lrdwave(&["frobnicate"], tmp.path())), 2);
}

#[test]
fn montecarlo_quick_only_emits_outputs_with_stable_hash() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("cfg.json"), r#"{"d_values": [0.2], "estimators": ["WAVELET_PGLS"]}"#).unwrap();
    let args = ["montecarlo", "--config", "cfg.json", "--quick", "--only", "X2", "--replications", "3", "--out", "runs"];
    let first = lrdwave(&args, tmp.path());
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let dir = String::from_utf8(first.stdout).unwrap().trim().to_string();
    let dir = tmp.path().join(dir);
    for f in ["summary.csv", "summary.json", "table.txt"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let csv = fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("X2,0.2,1000,WAVELET_PGLS"));

    std::thread::sleep(std::time::Duration::from_millis(1100));
    let second = lrdwave(&args, tmp.path());
    let dir2 = String::from_utf8(second.stdout).unwrap().trim().to_string();
    let hash = |p: &str| p.rsplit('_').next().unwrap().to_string();
    assert_eq!(hash(&dir.to_string_lossy()), hash(&dir2));
    let a = fs::read_to_string(dir.join("summary.csv")).unwrap();
    let b = fs::read_to_string(tmp.path().join(&dir2).join("summary.csv")).unwrap();
    let strip = |s: &str| s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn montecarlo_rejects_bad_config() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.json"), r#"{"replications": 0}"#).unwrap();
    assert_eq!(code(&lrdwave(&["montecarlo", "--config", "bad.json"], tmp.path())), 2);
    fs::write(tmp.path().join("bad.json"), r#"{"level": "high"}"#).unwrap();
    assert_ne!(code(&lrdwave(&["montecarlo", "--config", "bad.json"], tmp.path())), 0);
}

#[test]
fn gamma_tabulates_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lrdwave(&["gamma", "--d", "0,0.2,0.4", "--ell", "5,10,20"], tmp.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    for chunk in rows.chunks(3) {
        assert!(chunk[0][2] > chunk[1][2] && chunk[1][2] > chunk[2][2]);
    }
    assert_eq!(code(&lrdwave(&["gamma", "--d", "0.5"], tmp.path())), 2);
}

#[test]
fn threads_flag_and_env_are_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lrdwave(&["--threads", "2", "gamma", "--d", "0.1", "--ell", "3"], tmp.path());
    assert_eq!(code(&o), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_lrdwave"))
        .args(["gamma", "--d", "0.1", "--ell", "3"])
        .env("LRDWAVE_THREADS", "1")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(code(&lrdwave(&["--threads", "0", "gamma"], tmp.path())), 2);
}
