use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dpsub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpsub")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

const SMALL_RUN: &str = r#"{
  "experiment": "cardinality-sweep",
  "dataset": {
    "pickups": {"synthetic": {"bbox": [40.70, -74.02, 40.88, -73.96], "m": 30}},
    "locations": {"grid": {"rows": 2, "cols": 2, "corner_copies": 2}}
  },
  "algorithms": [
    {"name": "pcg", "eta": 0.5, "epsilon": 1.0, "samples": 50},
    {"name": "greedy"}
  ],
  "sweep": [2, 9],
  "repetitions": 3,
  "seed": 7
}"#;

#[test]
fn synth_succeeds_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let res = dpsub(&["synth", "--bbox", "40.7,-74.02,40.88,-73.96", "--m", "25", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let data = dpsub_bench::dataset::load_pickups(&out).unwrap();
    assert_eq!(data.len(), 25);
}

#[test]
fn config_and_usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"experiment": "single-run", "bogus": 1}"#);
    let out = dir.path().join("o");
    let res = dpsub(&["run", "--config", &bad, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!res.stderr.is_empty());

    assert_eq!(dpsub(&["run"]).status.code(), Some(2));
    assert_eq!(dpsub(&["frobnicate"]).status.code(), Some(2));

    let missing = dir.path().join("nope.json");
    assert_eq!(dpsub(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(2));

    let malformed = write(dir.path(), "pickups.csv", "lat,lon\n40.7,-74.0\n40.8,-74.0,9\n");
    let cfg = SMALL_RUN.replace(
        r#"{"synthetic": {"bbox": [40.70, -74.02, 40.88, -73.96], "m": 30}}"#,
        &format!(r#"{{"file": {{"path": {malformed:?}}}}}"#),
    );
    let cfg = cfg.replace(
        r#""grid": {"rows""#,
        r#""grid": {"bbox": [40.70, -74.02, 40.88, -73.96], "rows""#,
    );
    let cfg = write(dir.path(), "file.json", &cfg);
    let res = dpsub(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("pickups.csv:3:"), "error names the line");
}

#[test]
fn runtime_failure_exits_three_and_keeps_partial_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", SMALL_RUN);
    let out = dir.path().join("o");
    let res = dpsub(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));

    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "failed");
    assert!(manifest["error"]["message"].as_str().is_some_and(|e| e.contains("exceeds")));
    assert_eq!(manifest["error"]["sweep"], 9);
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let rows = dpsub_bench::report::parse_summary(&summary).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.1 == 2), "only the completed sweep value is reported");
}

#[test]
fn successful_run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", &SMALL_RUN.replace("[2, 9]", "[1, 2]"));
    let out = dir.path().join("o");
    let res = dpsub(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "11"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    for name in ["summary.csv", "raw.jsonl", "chart.svg", "manifest.json"] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 11);
}

#[test]
fn audit_prints_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "audit.json",
        r#"{
  "experiment": "audit",
  "dataset": {
    "pickups": {"synthetic": {"bbox": [40.70, -74.02, 40.88, -73.96], "m": 4}},
    "locations": {"grid": {"rows": 1, "cols": 3, "corner_copies": 0}}
  },
  "matroid": {"kind": "cardinality", "r": 1},
  "algorithms": [{"name": "pcg", "eta": 0.5, "epsilon": 0.5, "delta": 0.01, "samples": 20}],
  "repetitions": 1,
  "seed": 3,
  "audit": {"agent": 0}
}"#,
    );
    let res = dpsub(&["audit", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let report: Value = serde_json::from_slice(&res.stdout).unwrap();
    let claimed = report["epsilon_claimed"].as_f64().unwrap();
    assert!((claimed - 0.5).abs() < 1e-9);
    assert!(report["epsilon_observed"].as_f64().unwrap() <= claimed);
    assert_eq!(report["delta_excess"].as_f64(), Some(0.0));
    assert_eq!(report["sequences"].as_array().unwrap().len(), 9);
}

#[test]
fn opt_matches_a_direct_scan() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "inst.json",
        r#"{
  "dataset": {
    "pickups": {"synthetic": {"bbox": [40.70, -74.02, 40.88, -73.96], "m": 12}},
    "locations": {"grid": {"rows": 2, "cols": 3, "corner_copies": 0}}
  },
  "matroid": {"kind": "cardinality", "r": 2},
  "seed": 5
}"#,
    );
    let res = dpsub(&["opt", "--instance", &inst]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let answer: Value = serde_json::from_slice(&res.stdout).unwrap();
    let set: Vec<usize> = serde_json::from_value(answer["set"].clone()).unwrap();
    assert_eq!(set.len(), 2);

    let cfg = dpsub_bench::runner::InstanceFile::load(Path::new(&inst)).unwrap();
    let loaded = dpsub_bench::runner::Loaded::new(&cfg).unwrap();
    let instance = dpsub_bench::runner::build_instance(&cfg, &loaded, 0, 0).unwrap();
    let best = (0..6)
        .flat_map(|a| (a + 1..6).map(move |b| vec![a, b]))
        .map(|s| instance.objective.value(&s) / instance.normalizer)
        .fold(f64::MIN, f64::max);
    assert!((answer["value"].as_f64().unwrap() - best).abs() < 1e-12);
}
