//! End-to-end runs of the `fsmsmith` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fsmsmith(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsmsmith"))
        .args(args)
        .env_remove("FSMSMITH_CORPUS")
        .output()
        .expect("the binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn solution(rel: &str) -> String {
    root().join("fixtures/solutions").join(rel).to_string_lossy().into_owned()
}

#[test]
fn rendered_prompt_matches_the_golden_file() {
    let o = fsmsmith(&["prompt", "render", "Lemmings1", "--patch", "sync-reset"]);
    assert!(o.status.success());
    let want = std::fs::read_to_string(root().join("fixtures/prompts/Lemmings1.sync-reset.md")).unwrap();
    assert_eq!(stdout(&o), want);
}

#[test]
fn problems_lists_the_corpus() {
    let o = fsmsmith(&["problems"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().count() >= 20);
    assert!(text.contains("Lemmings1"));
}

#[test]
fn check_exit_codes_follow_the_outcome() {
    let ok = fsmsmith(&["check", &solution("Fsm1/correct.sv"), "--problem", "Fsm1"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("result: ok"));

    let bad = fsmsmith(&["check", &solution("Fsm1/multi_driver.sv"), "--problem", "Fsm1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("result: MultiDriver"));
    assert!(!bad.stderr.is_empty());
}

#[test]
fn equiv_prints_a_counterexample() {
    let o = fsmsmith(&["equiv", &solution("Lemmings1/swapped_bumps.sv"), "--problem", "Lemmings1"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("result: counterexample"), "{text}");
    assert!(text.contains("cycle 0:"), "{text}");
    assert!(text.contains("expected"), "{text}");

    let o = fsmsmith(&["equiv", &solution("Lemmings1/correct.sv"), "--problem", "Lemmings1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("result: equivalent"));
}

#[test]
fn errors_exit_with_two() {
    assert_eq!(fsmsmith(&["bench", "run", "--config", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(fsmsmith(&["check", "--bogus"]).status.code(), Some(2));
    assert_eq!(fsmsmith(&["prompt", "render", "NoSuchProblem"]).status.code(), Some(2));
}

fn write_config(dir: &Path) -> PathBuf {
    let text = std::fs::read_to_string(root().join("fixtures/runs/replay.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let replay = root().join("fixtures/replay").to_string_lossy().into_owned();
    for c in v["configs"].as_array_mut().unwrap() {
        c["provider"] = serde_json::json!({ "replay": { "dir": replay } });
    }
    v["output_dir"] = serde_json::json!(dir.join("runs"));
    let path = dir.join("run.json");
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path
}

#[test]
fn bench_run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let o = fsmsmith(&["bench", "run", "--config", config.to_str().unwrap()]);
    assert!(o.status.code() == Some(0) || o.status.code() == Some(1), "{o:?}");
    let run = dir.path().join("runs/replay");
    assert!(run.join("report.md").is_file());

    let o = fsmsmith(&["report", run.to_str().unwrap()]);
    assert!(o.status.success());
    let md = stdout(&o);
    assert_eq!(md, std::fs::read_to_string(run.join("report.md")).unwrap());

    let o = fsmsmith(&["report", run.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["results"].as_array().unwrap().len(), 6 * 3 * 5);
}

#[test]
fn reference_report_notes_the_printed_total() {
    let path = root().join("fixtures/reference_scores.json");
    let o = fsmsmith(&["report", "--reference", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("printed success rate 41%"), "{text}");
    assert!(text.contains("43%"));
}
