use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde::Deserialize;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rms-sched")).args(args).env_remove("RMS_SCHED_THREADS").output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[derive(Debug, Deserialize)]
struct Curve {
    episode: usize,
    series: String,
    value: f64,
}

#[test]
fn malformed_scenario_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"name\": \"x\", ").unwrap();
    let out = run(&["bench", "--config", p(&bad), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let missing = run(&["bench", "--config", p(&dir.path().join("nope.json")), "--out", p(&dir.path().join("o"))]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn bench_writes_one_row_per_episode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    let res = run(&[
        "bench", "--config", p(&scenario("desk.json")), "--policies", "edf,random", "--seeds", "0..3", "--episodes", "5",
        "--out", p(&out),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let mut reader = csv::Reader::from_path(out.join("results.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 3 * 5);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 2);
}

#[test]
fn dqn_without_checkpoint_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["bench", "--config", p(&scenario("desk.json")), "--policies", "dqn", "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    let empty = run(&[
        "bench", "--config", p(&scenario("desk.json")), "--policies", "dqn", "--checkpoint", p(dir.path()), "--out",
        p(&dir.path().join("o")),
    ]);
    assert_eq!(empty.status.code(), Some(2));
}

#[test]
fn unknown_policy_and_bad_seeds_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    for args in [["--policies", "sjf"], ["--seeds", "3..1"]] {
        let desk = scenario("desk.json");
        let mut full = vec!["bench", "--config", p(&desk), "--out", p(&o)];
        full.extend(args);
        assert_eq!(run(&full).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn breakdown_needs_a_breakdown_plan() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["breakdown", "--config", p(&scenario("desk.json")), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_then_plot_epsilon_curve() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train");
    let res = run(&["train", "--config", p(&scenario("smoke.json")), "--episodes", "6", "--seed", "1", "--out", p(&train)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for f in ["train_log.csv", "agent.json", "train_config.json", "negotiation_log.csv"] {
        assert!(train.join(f).exists(), "{f}");
    }

    let plots = dir.path().join("plots");
    let res = run(&["plotdata", "--log", p(&train), "--out", p(&plots)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let curves: Vec<Curve> =
        csv::Reader::from_path(plots.join("curves.csv")).unwrap().deserialize().map(Result::unwrap).collect();
    let eps: Vec<&Curve> = curves.iter().filter(|c| c.series == "epsilon").collect();
    assert_eq!(eps.len(), 6);
    for c in eps {
        let expected = 0.995f64.powi(c.episode as i32).max(0.05);
        assert!((c.value - expected).abs() < 1e-9, "episode {}: {} vs {expected}", c.episode, c.value);
    }

    let res = run(&[
        "bench", "--config", p(&scenario("smoke.json")), "--policies", "dqn", "--checkpoint", p(&train), "--seeds", "0",
        "--episodes", "2", "--out", p(&dir.path().join("b")),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn checkpoint_for_another_scenario_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train");
    assert!(run(&["train", "--config", p(&scenario("smoke.json")), "--episodes", "1", "--out", p(&train)]).status.success());
    let out = run(&[
        "bench", "--config", p(&scenario("desk.json")), "--policies", "dqn", "--checkpoint", p(&train), "--out",
        p(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_log_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["plotdata", "--log", p(dir.path()), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
}
