use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use paradiff_lab::{run, ExperimentConfig, RunError, Scenario};
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paradiff-lab")).args(args).output().expect("binary runs")
}

fn run_into(dir: &Path, scenario: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = configs().join(config);
    let mut args = vec!["run", scenario, "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    lab(&args)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn boundedness_run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), "boundedness", "boundedness_random.json", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let results = read_json(&dir.path().join("results.json"));
    for key in ["scenario", "params", "seed", "metrics", "wall_time_s", "tool_version"] {
        assert!(results.get(key).is_some(), "results.json lacks {key}");
    }
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["scenario"], "boundedness");
    assert_eq!(manifest["passed"], true);

    let table = std::fs::read_to_string(dir.path().join("tables/boundedness.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("scale,s,p,q,N,value"));
    // four norm specs at three refinements
    assert_eq!(lines.count(), 12);
}

#[test]
fn same_seed_gives_identical_metrics() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = run_into(dir.path(), "inequalities", "inequalities.json", &["--seed", "17"]);
        assert_eq!(out.status.code(), Some(0));
    }
    let strip = |dir: &Path| {
        let mut v = read_json(&dir.join("results.json"));
        v.as_object_mut().unwrap().remove("wall_time_s");
        v
    };
    let (ra, rb) = (strip(a.path()), strip(b.path()));
    assert_eq!(ra["seed"], 17);
    assert_eq!(ra, rb);
}

#[test]
fn grid_override_replaces_refinements() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), "boundedness", "boundedness_random.json", &["--grid", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let results = read_json(&dir.path().join("results.json"));
    assert_eq!(results["params"]["grid"]["N"], 64);
    assert_eq!(results["params"]["refinements"], Value::Array(vec![]));
}

#[test]
fn mismatched_scenario_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), "ching", "inequalities.json", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config is for scenario inequalities"));
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"grid": {"n": 1, "N": 64}, "partition": {"r": 1, "R": 2}, "symbol": {"family": "identity"}, "colour": 3}"#).unwrap();
    let out = lab(&["run", "boundedness", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identity_sweep_passes_in_process() {
    let cfg: ExperimentConfig = serde_json::from_str(
        r#"{"grid": {"n": 1, "N": 64}, "partition": {"r": 1, "R": 2}, "symbol": {"family": "identity"},
            "norms": [{"scale": "B", "s": 0.5, "p": 2, "q": "inf"}], "corpus_size": 3}"#,
    )
    .unwrap();
    let rec = run(&cfg, Scenario::Boundedness).unwrap();
    assert!(rec.passed(), "{:?}", rec.failures());
    assert!(rec.anchors_covered().contains(&"boundedness/identity".to_string()));
}

#[test]
fn ching_study_without_levels_is_rejected() {
    let cfg: ExperimentConfig = serde_json::from_str(
        r#"{"grid": {"n": 1, "N": 64}, "partition": {"r": 1, "R": 2},
            "symbol": {"family": "ching", "d": 0, "levels": 2}, "smoothness": [0]}"#,
    )
    .unwrap();
    assert!(matches!(run(&cfg, Scenario::Ching), Err(RunError::Config(_))));
}
