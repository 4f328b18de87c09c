//! Writes the hand-written replay transcripts under `fixtures/replay`.
//!
//! Replies are taken from `fixtures/solutions`; each (problem, config) row
//! lists the variant answered in trials 0..5. Run with
//! `cargo run -p fsmsmith --example make_replay_fixtures`.

use std::path::{Path, PathBuf};

use fsmsmith::corpus::{bundled_corpus, ProblemSpec};
use fsmsmith::eval::{compile, session_id};
use fsmsmith::gateway::{save_transcript, ChatMessage, Transcript};
use fsmsmith::prompt::{
    apply_top_patch, build_multishot_plan, build_systematic_prompt, render, transition_table_markdown, TopPatch,
    SYNC_RESET,
};
use fsmsmith::sv::format_diagnostics;

const PLAN: &[(&str, &str, [&str; 5])] = &[
    ("Fsm1", "systematic", ["correct", "correct", "sync_reset", "multi_driver", "correct"]),
    ("Fsm1s", "systematic", ["correct", "async_reset", "correct", "correct", "syntax"]),
    ("Fsm2s", "systematic", ["async_reset", "async_reset", "correct", "async_reset", "correct"]),
    ("Fsm3comb", "systematic", ["correct", "correct", "comb_loop", "correct", "correct"]),
    ("Fsm3onehot", "systematic", ["case_on_state"; 5]),
    ("Lemmings1", "systematic", ["swapped_bumps", "correct", "swapped_bumps", "swapped_bumps", "no_code"]),
    ("Fsm1", "sync-reset-patch", ["correct"; 5]),
    ("Fsm1s", "sync-reset-patch", ["correct"; 5]),
    ("Fsm2s", "sync-reset-patch", ["correct", "correct", "correct", "async_reset", "correct"]),
    ("Fsm3comb", "sync-reset-patch", ["correct", "correct", "correct", "correct", "comb_loop"]),
    ("Fsm3onehot", "sync-reset-patch", ["case_on_state", "correct", "case_on_state", "case_on_state", "case_on_state"]),
    ("Lemmings1", "sync-reset-patch", ["correct", "swapped_bumps", "correct", "correct", "swapped_bumps"]),
    ("Fsm1", "multishot-feedback", ["syntax+correct", "correct", "correct", "multi_driver+multi_driver", "correct"]),
    ("Fsm1s", "multishot-feedback", ["correct", "syntax+correct", "correct", "correct", "correct"]),
    ("Fsm2s", "multishot-feedback", ["correct", "async_reset", "correct", "syntax+async_reset", "correct"]),
    ("Fsm3comb", "multishot-feedback", ["correct"; 5]),
    ("Fsm3onehot", "multishot-feedback", ["correct", "case_on_state", "syntax+syntax", "correct", "case_on_state"]),
    ("Lemmings1", "multishot-feedback", ["correct", "correct", "swapped_bumps", "syntax+correct", "correct"]),
];

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn solution(problem: &str, variant: &str) -> String {
    let path = root().join("fixtures/solutions").join(problem).join(format!("{variant}.sv"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Drops the last semicolon of the correct solution.
fn broken(problem: &str) -> String {
    let mut code = solution(problem, "correct");
    let at = code.rfind(';').expect("solutions end with a statement");
    code.remove(at);
    code
}

fn code_for(problem: &str, variant: &str) -> Option<String> {
    match variant {
        "no_code" => None,
        "syntax" => Some(broken(problem)),
        v => Some(solution(problem, v)),
    }
}

fn fenced(code: &str) -> String {
    format!("Here is the complete module.\n\n```systemverilog\n{code}```\n")
}

fn reply(problem: &str, variant: &str) -> String {
    match code_for(problem, variant) {
        Some(code) => fenced(&code),
        None => "I am not able to write this module without more information about the expected timing.\n".into(),
    }
}

fn user_messages(p: &ProblemSpec, config: &str, context: Option<&ProblemSpec>) -> Vec<String> {
    let doc = build_systematic_prompt(p, context);
    match config {
        "systematic" => vec![render(&doc)],
        "sync-reset-patch" => {
            let patch = TopPatch::builtin(SYNC_RESET).unwrap();
            vec![render(&apply_top_patch(&doc, &patch).unwrap())]
        }
        "multishot-feedback" => build_multishot_plan(p).messages(&doc),
        other => panic!("unknown config {other}"),
    }
}

fn transcript(p: &ProblemSpec, context: Option<&ProblemSpec>, config: &str, trial: u32, variant: &str) -> Transcript {
    let mut t = Transcript::new(&session_id(&p.id, config, trial), "fixture", "hand-written");
    t.meta.insert("synthetic".into(), true.into());
    let users = user_messages(p, config, context);
    let (first, fix) = match variant.split_once('+') {
        Some((a, b)) => (a, Some(b)),
        None => (variant, None),
    };
    for (i, u) in users.iter().enumerate() {
        t.messages.push(ChatMessage::user(u.clone()));
        let last = i + 1 == users.len();
        let text = match (last, i) {
            (true, _) => reply(&p.id, first),
            (false, 0) => "The outputs follow the state one cycle after each input change, and reset returns the \
                           machine to its initial state.\n"
                .to_string(),
            (false, _) => transition_table_markdown(p),
        };
        t.messages.push(ChatMessage::assistant(text));
    }
    if let Some(fix) = fix {
        let code = code_for(&p.id, first).expect("a feedback round follows code");
        let (_, diags) = compile(p, &code).expect_err("feedback follows a compile error");
        t.messages.push(ChatMessage::user(format_diagnostics(&diags, &code)));
        t.messages.push(ChatMessage::assistant(reply(&p.id, fix)));
    }
    t
}

fn main() {
    let corpus = bundled_corpus().unwrap();
    let out: &Path = &root().join("fixtures/replay");
    if out.exists() {
        std::fs::remove_dir_all(out).unwrap();
    }
    let mut n = 0;
    for (problem, config, variants) in PLAN {
        let p = corpus.get(problem).unwrap();
        let context = corpus.predecessor(p);
        for (trial, variant) in variants.iter().enumerate() {
            save_transcript(&transcript(p, context, config, trial as u32, variant), out).unwrap();
            n += 1;
        }
    }
    println!("wrote {n} transcripts to {}", out.display());
}
