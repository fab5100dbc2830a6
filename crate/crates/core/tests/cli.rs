//! End-to-end checks of the `bulkflux` binary: exit codes, artifacts, determinism.

use std::path::Path;
use std::process::Command;

fn bulkflux(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bulkflux")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    bulkflux(args).status.code().expect("exited normally")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn simulate_writes_artifacts_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bulkflux(&["simulate", "--out", out, "--set", "mesh.resolution=8", "--set", "solver.t_end=0.3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for stem in ["ledger", "snapshots", "entropy"] {
        let csv = read(&dir.path().join(format!("{stem}.csv")));
        assert!(csv.lines().next().unwrap().starts_with('t'), "{stem} lacks a header");
        let meta: serde_json::Value = serde_json::from_str(&read(&dir.path().join(format!("{stem}.meta.json")))).unwrap();
        let stamp = meta["created"].as_str().unwrap();
        assert!(chrono::DateTime::parse_from_rfc3339(stamp).is_ok(), "{stamp}");
        assert_eq!(meta["scenario"], "flat_linear");
    }
    // the entropy column of a conforming run never increases
    let ledger = read(&dir.path().join("ledger.csv"));
    let header: Vec<&str> = ledger.lines().next().unwrap().split(',').collect();
    let h = header.iter().position(|c| *c == "H").unwrap();
    let values: Vec<f64> = ledger.lines().skip(1).map(|l| l.split(',').nth(h).unwrap().parse().unwrap()).collect();
    assert!(values.len() > 10);
    assert!(values.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn identical_config_and_seed_give_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = d.path().to_str().unwrap();
        assert_eq!(code(&["simulate", "--out", out, "--seed", "9", "--set", "mesh.resolution=8", "--set", "solver.t_end=0.1"]), 0);
        assert_eq!(code(&["sweep", "--axis", "N", "--values", "2,4,8", "--out", out, "--seed", "9"]), 0);
    }
    for f in ["ledger.csv", "snapshots.csv", "entropy.csv", "sweep_N.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn configuration_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&["simulate", "--scenario", "/no/such/scenario.json", "--out", out]), 1);
    assert_eq!(code(&["simulate", "--scenario", "builtin:unknown", "--out", out]), 1);
    assert_eq!(code(&["simulate", "--set", "solver.epsilon=7", "--out", out]), 1);
    assert_eq!(code(&["sweep", "--axis", "temperature", "--values", "1,2", "--out", out]), 1);
    assert_eq!(code(&["sweep", "--axis", "N", "--values", "two", "--out", out]), 1);
    assert_eq!(code(&["not-a-command"]), 1);
    let o = bulkflux(&["verify-all", "--suites", "", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nothing to verify"));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&["simulate", "--scenario", bad.to_str().unwrap(), "--out", out]), 1);
}

#[test]
fn scenario_files_load_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, bulkflux::scenarios::builtin_json("triple_junction_linear").unwrap()).unwrap();
    let out = dir.path().join("o");
    let o = bulkflux(&[
        "simulate",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--set",
        "solver.t_end=0.05",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn dt_underflow_aborts_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = bulkflux(&[
        "simulate",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "solver.dt_min=0.001",
        "--set",
        "solver.max_relative_change=1e-9",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dt_min"));
}

#[test]
fn epsilon_sweep_distance_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bulkflux(&[
        "sweep",
        "--scenario",
        "builtin:flat_polynomial",
        "--axis",
        "epsilon",
        "--values",
        "1,0.5,0.25,0.125",
        "--set",
        "solver.t_end=0.3",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&dir.path().join("sweep_epsilon.csv"));
    let d: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(d.len(), 4);
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    assert!(dir.path().join("sweep_epsilon.meta.json").exists());
}

#[test]
fn n_sweep_decay_shrinks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&["sweep", "--axis", "N", "--values", "2,4,8", "--out", out]), 0);
    let csv = read(&dir.path().join("sweep_N.csv"));
    let d: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    for w in d.windows(2) {
        let r = w[0] / w[1];
        assert!((1.0..=4.0).contains(&r), "ratio {r}");
    }
}

#[test]
fn resolution_sweep_residual_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bulkflux(&["sweep", "--axis", "resolution", "--values", "8,16", "--set", "solver.t_end=0.1", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&dir.path().join("sweep_resolution.csv"));
    let rows: Vec<Vec<f64>> =
        csv.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert!(rows[1][2] < rows[0][2] && rows[1][3] < rows[0][3], "{rows:?}");
}

#[test]
fn verification_commands_pass_and_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&["verify-truncations", "--out", out]), 0);
    assert_eq!(code(&["verify-kinetics", "--all-builtin", "--samples", "2000", "--out", out]), 0);
    assert_eq!(code(&["verify-geometry", "--samples", "2000", "--out", out]), 0);
    let o = bulkflux(&["verify-all", "--suites", "controls,truncations", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value = serde_json::from_str(&read(&dir.path().join("verify_all.json"))).unwrap();
    assert_eq!(report["passed"], true);
    let controls = &report["suites"][0]["details"]["raised"];
    assert_eq!(controls.as_array().unwrap().len(), 4);
}

#[test]
fn nonconforming_model_fails_verification_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bulkflux(&[
        "verify-kinetics",
        "--scenario",
        "builtin:flat_polynomial",
        "--set",
        "model.bulk_variant=log_growth",
        "--samples",
        "1000",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn renorm_residual_emits_report_entries() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bulkflux(&["renorm-residual", "--t-end", "0.05", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let entries: serde_json::Value = serde_json::from_str(&read(&dir.path().join("residuals.json"))).unwrap();
    let first = &entries[0];
    for key in ["test_id", "anchor", "E", "residual", "refinement_series", "fitted_order"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    assert_eq!(first["refinement_series"].as_array().unwrap().len(), 3);
}
