use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SMALL: &str = r#"{
  "tolerances": {"observable": 1e-3},
  "grids": {
    "radial": {"rho_min": -4, "rho_max": 4, "n": 32},
    "angular": 16,
    "switch_radial": {"rho_min": -2, "rho_max": 2, "n": 24},
    "switch_angular": 16
  },
  "suites": {"samples": 10, "quantum_reduce": {"states": 3}, "evolve": {"t_final": 0.1}}
}"#;

fn relframe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relframe"))
        .args(args)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("RELFRAME_THREADS")
        .output()
        .expect("spawn relframe")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

#[test]
fn verify_algebra_passes_with_defaults() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"suites": {"samples": 20}}"#);
    let out = relframe(dir.path(), &["verify-algebra", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report = read_json(dir.path(), "verify_algebra.json");
    assert_eq!(report["schema"], 1);
    assert_eq!(report["pass"], true);
    assert_eq!(report["suites"].as_array().unwrap().len(), 10);
}

#[test]
fn tolerance_below_roundoff_fails() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"tolerances": {"euclidean": 1e-14}, "suites": {"samples": 10}}"#);
    let out = relframe(dir.path(), &["verify-algebra", "--config", &cfg, "--suite", "euclidean"]);
    assert_eq!(out.status.code(), Some(1));
    let report = read_json(dir.path(), "verify_algebra.json");
    assert_eq!(report["pass"], false);
    assert!(report["suites"][0]["checks"].as_array().unwrap().iter().any(|c| c["pass"] == false));
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"tolerance": {}}"#);
    assert_eq!(relframe(dir.path(), &["verify-algebra", "--config", &bad]).status.code(), Some(2));
    let broken = write(dir.path(), "broken.json", "{");
    assert_eq!(relframe(dir.path(), &["verify-algebra", "--config", &broken]).status.code(), Some(2));
    assert_eq!(relframe(dir.path(), &["verify-algebra", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(relframe(dir.path(), &["classify"]).status.code(), Some(2));
    assert_eq!(relframe(dir.path(), &["no-such-command"]).status.code(), Some(2));
    let threads = Command::new(env!("CARGO_BIN_EXE_relframe"))
        .args(["report", "--out"])
        .arg(dir.path().join("out"))
        .env("RELFRAME_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL);
    let mut runs = Vec::new();
    for _ in 0..2 {
        for cmd in ["verify-algebra", "quantum-reduce"] {
            relframe(dir.path(), &[cmd, "--config", &cfg, "--seed", "7"]);
        }
        let out = dir.path().join("out");
        runs.push(
            ["verify_algebra.json", "quantum_reduce.json", "expectations.csv"].map(|f| fs::read(out.join(f)).unwrap()),
        );
    }
    assert_eq!(runs[0], runs[1]);
    relframe(dir.path(), &["verify-algebra", "--config", &cfg, "--seed", "8"]);
    assert_ne!(fs::read(dir.path().join("out/verify_algebra.json")).unwrap(), runs[0][0]);
}

#[test]
fn classify_reports_orbit_dimension() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (r#"{"q": [[1,1,1],[1,1,1],[1,1,1]], "p": [[0,0,0],[0,0,0],[0,0,0]]}"#, 3),
        (r#"{"q": [[0,0,0],[0,0,1],[0,0,3]], "p": [[0,0,0.5],[0,0,-0.2],[0,0,-0.3]]}"#, 5),
        (r#"{"q": [[0,0,0],[0,0,1],[1,0,1]], "p": [[0,0,0],[0,0,0],[0,0,0]]}"#, 6),
    ];
    for (point, dim) in cases {
        let input = write(dir.path(), "pt.json", point);
        assert_eq!(relframe(dir.path(), &["classify", "--input", &input]).status.code(), Some(0));
        let report = read_json(dir.path(), "classify.json");
        assert_eq!(report["orbit_dimension"], dim);
        assert_eq!(report["singular_values"].as_array().unwrap().len(), 6);
    }
}

#[test]
fn evolve_stationary_free_state_is_constant() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"potential": {"kind": "none"},
            "suites": {"evolve": {"initial": {"qb_z": 1, "pb_z": 0, "qc_x": 1, "pc_x": 0, "qc_z": 1, "pc_z": 0}, "t_final": 0.05, "dt": 0.01}}}"#,
    );
    assert_eq!(relframe(dir.path(), &["evolve", "--config", &cfg]).status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("out/trajectory_reduced.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').skip(1).collect()).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| *r == rows[0]));
    assert!(dir.path().join("out/trajectory_gauge_fixed.csv").exists());
    assert_eq!(read_json(dir.path(), "evolve.json")["pass"], true);
}

#[test]
fn evolve_energy_drift_column_is_monotone() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL);
    assert_eq!(relframe(dir.path(), &["evolve", "--config", &cfg]).status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("out/trajectory_reduced.csv")).unwrap();
    let drift: Vec<f64> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(drift.windows(2).all(|w| w[1] >= w[0]));
    assert!(*drift.last().unwrap() < 1e-10);
}

#[test]
fn classical_switch_of_e1() {
    let dir = TempDir::new().unwrap();
    let out = relframe(dir.path(), &["switch"]);
    assert_eq!(out.status.code(), Some(0));
    let state = read_json(dir.path(), "switch_state.json");
    for (k, v) in [("qb_z", 1.0), ("pb_z", 0.0), ("qc_x", 1.0), ("pc_x", 0.0), ("qc_z", 1.0), ("pc_z", 0.0)] {
        assert!((state[k].as_f64().unwrap() - v).abs() < 1e-12, "{k}");
    }
}

#[test]
fn classical_switch_of_degenerate_input_is_an_error_status() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "s.json", r#"{"qb_z": 1, "pb_z": 0, "qc_x": 0, "pc_x": 0, "qc_z": 2, "pc_z": 0}"#);
    assert_eq!(relframe(dir.path(), &["switch", "--input", &input]).status.code(), Some(1));
    let report = read_json(dir.path(), "switch.json");
    assert_eq!(report["status"], "error");
    assert!(!dir.path().join("out/switch_state.json").exists());
}

#[test]
fn quantum_commands_on_small_grids() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL);
    assert_eq!(relframe(dir.path(), &["quantum-reduce", "--config", &cfg]).status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("out/expectations.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 6);

    assert_eq!(relframe(dir.path(), &["switch", "--kind", "quantum", "--config", &cfg]).status.code(), Some(0));
    let report = read_json(dir.path(), "quantum_switch.json");
    assert!(report["fidelity"].as_f64().unwrap() >= 0.999);
    assert!(report["forward"]["lost_mass"].as_f64().is_some());

    // the switched state is a valid input for a second switch
    let state = dir.path().join("out/quantum_switch_state.json");
    fs::copy(&state, dir.path().join("once.json")).unwrap();
    let input = dir.path().join("once.json");
    let out = relframe(dir.path(), &["quantum-switch", "--config", &cfg, "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn report_marks_missing_artifacts_as_skip() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL);
    relframe(dir.path(), &["verify-algebra", "--config", &cfg, "--suite", "legendre-addition"]);
    assert_eq!(relframe(dir.path(), &["report"]).status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert!(csv.contains("AC-9,Legendre addition,PASS"));
    assert!(csv.contains("AC-1,Euclidean algebra,SKIP"));
    assert_eq!(csv.lines().count(), 13);
    assert!(dir.path().join("out/report.md").exists());

    relframe(dir.path(), &["verify-algebra", "--config", &cfg, "--suite", "euclidean", "--seed", "3"]);
    let tight = write(dir.path(), "t.json", r#"{"tolerances": {"legendre": 0}}"#);
    relframe(dir.path(), &["verify-algebra", "--config", &tight, "--suite", "legendre-addition"]);
    assert_eq!(relframe(dir.path(), &["report"]).status.code(), Some(1));
}
