use std::path::PathBuf;

use fsmsmith::corpus::bundled_corpus;
use fsmsmith::eval::{grade_code, FailureKind};
use fsmsmith::golden::{reset_compliance, Compliance, EquivConfig, ResetViolation, Verdict};
use serde::Deserialize;

#[derive(Deserialize)]
struct Expectation {
    problem: String,
    file: String,
    expect: String,
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/solutions")
}

fn kind_name(k: Result<(), FailureKind>) -> String {
    match k {
        Ok(()) => "Pass".into(),
        Err(k) => k.to_string(),
    }
}

#[test]
fn every_fixture_gets_its_expected_kind() {
    let corpus = bundled_corpus().unwrap();
    let text = std::fs::read_to_string(fixtures().join("expected.json")).unwrap();
    let table: Vec<Expectation> = serde_json::from_str(&text).unwrap();
    let mut wrong = Vec::new();
    for e in &table {
        let p = corpus.get(&e.problem).unwrap();
        let code = std::fs::read_to_string(fixtures().join(&e.file)).unwrap();
        let g = grade_code(p, &code, &EquivConfig::for_problem(p));
        let got = kind_name(g.outcome);
        if got != e.expect {
            wrong.push(format!("{}: expected {}, got {got}\n{}", e.file, e.expect, g.report(&code)));
        }
    }
    assert!(wrong.is_empty(), "{}", wrong.join("\n"));
    let mutants = table.iter().filter(|e| e.expect != "Pass").count();
    assert!(mutants >= 10);
}

#[test]
fn functional_mutants_have_short_replayable_counterexamples() {
    let corpus = bundled_corpus().unwrap();
    let p = corpus.get("Lemmings1").unwrap();
    let code = std::fs::read_to_string(fixtures().join("Lemmings1/swapped_bumps.sv")).unwrap();
    let g = grade_code(p, &code, &EquivConfig::for_problem(p));
    let Some(Verdict::Counterexample(cx)) = g.verdict else { panic!("{g:?}") };
    assert!(cx.inputs.len() <= 2, "{:?}", cx.inputs);
    assert!(cx.output == "walk_left" || cx.output == "walk_right");
    assert_ne!(cx.expected[&cx.output], cx.actual[&cx.output]);
}

#[test]
fn reset_style_is_distinguished_in_both_directions() {
    let corpus = bundled_corpus().unwrap();
    let check = |problem: &str, file: &str| {
        let p = corpus.get(problem).unwrap();
        let code = std::fs::read_to_string(fixtures().join(file)).unwrap();
        let (d, _) = fsmsmith::eval::compile(p, &code).unwrap();
        reset_compliance(&d, &p.golden).unwrap().outcome
    };
    assert_eq!(check("Fsm1s", "Fsm1s/correct.sv"), Compliance::Ok);
    assert_eq!(
        check("Fsm1s", "Fsm1s/async_reset.sv"),
        Compliance::Violation(ResetViolation::AsyncWhereSyncRequired)
    );
    assert_eq!(check("Fsm1", "Fsm1/correct.sv"), Compliance::Ok);
    assert_eq!(
        check("Fsm1", "Fsm1/sync_reset.sv"),
        Compliance::Violation(ResetViolation::SyncWhereAsyncRequired)
    );
    assert_eq!(
        check("Fsm1", "Fsm1/no_reset.sv"),
        Compliance::Violation(ResetViolation::NoResetBehavior)
    );
    assert_eq!(check("Fsm3comb", "Fsm3comb/correct.sv"), Compliance::NotApplicable);
}
