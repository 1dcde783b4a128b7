use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn peergrid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peergrid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_validate_and_solve() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.toml");
    let out = peergrid(&[
        "generate",
        "--n",
        "3",
        "--seed",
        "5",
        "--horizon",
        "6",
        "--out",
        path(&config),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("profiles/tiny/branches.csv").exists());

    let out = peergrid(&["validate", "--scenario", path(&config)]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["prosumers"], 3);
    assert_eq!(v["horizon"], 6);

    let with = peergrid(&["oracle", "--scenario", path(&config)]);
    let without = peergrid(&["oracle", "--scenario", path(&config), "--no-trade"]);
    assert!(with.status.success() && without.status.success());
    let with: Value = serde_json::from_slice(&with.stdout).unwrap();
    let without: Value = serde_json::from_slice(&without.stdout).unwrap();
    assert!(with["objective"].as_f64().unwrap() <= without["objective"].as_f64().unwrap() + 1e-9);
    assert_eq!(with["prosumers"].as_array().unwrap().len(), 3);
}

#[test]
fn missing_scenario_reports_json_error() {
    let out = peergrid(&["validate", "--scenario", "/nonexistent/scenario.toml"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "io");
    assert!(err["message"].as_str().unwrap().contains("scenario.toml"));
}

#[test]
fn run_writes_reports_that_recompute() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("s.toml");
    let out_dir = dir.path().join("out");
    assert!(peergrid(&[
        "generate",
        "--n",
        "2",
        "--seed",
        "1",
        "--horizon",
        "8",
        "--out",
        path(&config)
    ])
    .status
    .success());
    let out = peergrid(&[
        "run",
        "--scenario",
        path(&config),
        "--mode",
        "sync,async,oracle,oracle-notrade",
        "--eps1",
        "0.05",
        "--eps2",
        "0.05",
        "--seed",
        "4",
        "--trace",
        "--out-dir",
        path(&out_dir),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("sync:") && stdout.contains("async:"));

    for mode in ["sync", "async"] {
        let trace = std::fs::read_to_string(out_dir.join(format!("trace_{mode}.csv"))).unwrap();
        assert!(trace.starts_with("iter,active,primal_res,dual_res,objective"));
    }
    for mode in ["sync", "async", "oracle", "oracle-notrade"] {
        for i in 0..2 {
            let mut rdr =
                csv::Reader::from_path(out_dir.join(format!("schedule_{mode}_p{i:02}.csv")))
                    .unwrap();
            assert_eq!(rdr.headers().unwrap().len(), 9);
            let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
            assert_eq!(rows.len(), 8);
            assert!(rows.iter().all(|r| r.len() == 9));
        }
    }
    assert!(out_dir.join("summary.txt").exists());

    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("cost_report.json")).unwrap())
            .unwrap();
    let pct = |without: f64, with: f64| 100.0 * (without - with) / without.abs();
    for c in report["comparisons"].as_array().unwrap() {
        let (tw, tt) = (
            c["total_without"].as_f64().unwrap(),
            c["total_with"].as_f64().unwrap(),
        );
        assert!((c["total_reduction_pct"].as_f64().unwrap() - pct(tw, tt)).abs() <= 1e-9);
        for p in c["prosumers"].as_array().unwrap() {
            let (w, t) = (
                p["cost_without"].as_f64().unwrap(),
                p["cost_with"].as_f64().unwrap(),
            );
            assert!((p["reduction_pct"].as_f64().unwrap() - pct(w, t)).abs() <= 1e-9);
        }
    }
}

#[test]
fn conflicting_activation_flags_are_rejected() {
    let out = peergrid(&[
        "run",
        "--scenario",
        "x.toml",
        "--activation-prob",
        "0.5",
        "--dropout",
        "0.2",
    ]);
    assert!(!out.status.success());
}
