//! The eight acceptance criteria, one line of output each.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use fsmsmith::corpus::{bundled_corpus, Corpus};
use fsmsmith::eval::{
    compile, grade_code, run_benchmark, FailureKind, ReferenceTables, RunConfig, TrialVerdict,
};
use fsmsmith::gateway::Transcript;
use fsmsmith::golden::{reset_compliance, Compliance, EquivConfig, ResetViolation, Verdict};
use fsmsmith::prompt::{apply_top_patch, build_multishot_plan, build_systematic_prompt, render, TopPatch};
use fsmsmith::sim::{ResetPin, SimError, Simulator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(start.elapsed() < limit, format!("took {:?}, limit {limit:?}", start.elapsed()))
}

fn score_arithmetic() -> Outcome {
    let start = Instant::now();
    let tables = ReferenceTables::load(&root().join("fixtures/reference_scores.json")).map_err(|e| e.to_string())?;
    let table = |name: &str| tables.tables.iter().find(|t| t.name == name).ok_or(format!("no table {name}"));
    let totals = |name: &str, col: &str| -> Result<(u32, (u64, u64), u64), String> {
        let t = table(name)?.scores().totals[col];
        Ok((t.problems_solved, t.success_rate, t.success_rate_percent))
    };
    ensure(totals("sync-reset-patch", "ChatGPT-4o")?.2 == 30, "sync-reset before: 30%")?;
    ensure(totals("sync-reset-patch", "ChatGPT-4o + TOP Patch")?.2 == 70, "sync-reset after: 70%")?;
    ensure(totals("one-hot-patch", "Claude 3 Opus")?.2 == 90, "one-hot Claude: 90%")?;
    ensure(totals("one-hot-patch", "ChatGPT-4")?.2 == 30, "one-hot ChatGPT-4: 30%")?;
    ensure(totals("one-hot-patch", "ChatGPT-4o")?.2 == 40, "one-hot ChatGPT-4o: 40%")?;
    let gpt4 = totals("single-shot", "ChatGPT-4")?;
    ensure((gpt4.0, gpt4.2) == (8, 32), format!("ChatGPT-4 column: {gpt4:?}"))?;
    let gpt4o = totals("single-shot", "ChatGPT-4o")?;
    ensure((gpt4o.0, gpt4o.2) == (10, 31), format!("ChatGPT-4o column: {gpt4o:?}"))?;
    let claude = totals("single-shot", "Claude 3 Opus")?;
    ensure(claude.0 == 11 && claude.1 == (43, 100), format!("Claude column: {claude:?}"))?;
    let notes = table("single-shot")?.discrepancies();
    ensure(
        notes.len() == 1 && notes[0].contains("printed success rate 41%") && notes[0].contains("43%"),
        format!("notes: {notes:?}"),
    )?;
    for t in &tables.tables {
        if t.name != "single-shot" {
            ensure(t.discrepancies().is_empty(), format!("{}: {:?}", t.name, t.discrepancies()))?;
        }
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("Claude {}/{} = {}% (printed 41%), ChatGPT-4 8/32%, ChatGPT-4o 10/31%", claude.1 .0, claude.1 .1, claude.2))
}

fn replay_benchmark(corpus: &Corpus) -> Outcome {
    let start = Instant::now();
    let mut rc = RunConfig::load(&root().join("fixtures/runs/replay.json")).map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    let mut dirs = Vec::new();
    for _ in 0..2 {
        let out = tempfile::tempdir().map_err(|e| e.to_string())?;
        rc.output_dir = out.path().to_path_buf();
        let report = run_benchmark(&rc, corpus, None).map_err(|e| e.to_string())?;
        let run_dir = out.path().join(&report.run_id);
        reports.push((report, std::fs::read(run_dir.join("report.md")).map_err(|e| e.to_string())?));
        dirs.push(out);
    }
    ensure(reports[0].1 == reports[1].1, "report.md differs between runs")?;
    let (report, _) = &reports[0];
    ensure(report.problems.len() >= 6 && report.configs.len() >= 2, "fixture too small")?;
    ensure(report.configs.iter().all(|c| c.trials == 5), "five trials per config")?;
    let mut kinds: Vec<TrialVerdict> = report.results.iter().map(|r| r.verdict).collect();
    kinds.sort_by_key(|v| format!("{v:?}"));
    kinds.dedup();
    for want in [
        TrialVerdict::Pass,
        TrialVerdict::Fail(FailureKind::ResetStyleViolation),
        TrialVerdict::Fail(FailureKind::MultiDriver),
        TrialVerdict::Fail(FailureKind::Syntax),
        TrialVerdict::Fail(FailureKind::FunctionalMismatch),
    ] {
        ensure(kinds.contains(&want), format!("no {want:?} trial"))?;
    }

    // Passing code re-verifies on its own, and sessions hold one user
    // message per stage plus one per feedback round.
    let run_dir = dirs[0].path().join(&report.run_id);
    for r in &report.results {
        let p = corpus.get(&r.problem).map_err(|e| e.to_string())?;
        let config = rc.configs.iter().find(|c| c.name == r.config).unwrap();
        if r.passed() {
            let code = std::fs::read_to_string(run_dir.join(r.artifacts.code.as_ref().unwrap())).unwrap();
            let g = grade_code(p, &code, &EquivConfig::for_problem(p));
            ensure(g.outcome.is_ok(), format!("{}/{} trial {} does not re-verify", r.config, r.problem, r.trial))?;
        }
        let text = std::fs::read_to_string(run_dir.join(r.artifacts.transcript.as_ref().unwrap())).unwrap();
        let t: Transcript = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        let users = t.messages.iter().filter(|m| m.role == fsmsmith::gateway::Role::User).count();
        let stages = if config.multishot { build_multishot_plan(p).stages.len() } else { 1 };
        ensure(
            users == stages + r.rounds_used as usize,
            format!("{}: {users} user messages for {stages} stages", t.session_id),
        )?;
        if config.feedback_rounds == 0 {
            ensure(r.rounds_used == 0, "feedback round without feedback")?;
        }
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{} problems x {} configs x 5 trials, identical report.md, {} distinct verdicts",
        report.problems.len(),
        report.configs.len(),
        kinds.len()
    ))
}

fn equivalence_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    let (mut equivalent, mut different) = (0, 0);
    for i in 0..150 {
        let pair = common::random_pair(&mut rng, 6, 3);
        match common::compare(&pair, 12) {
            Ok(Verdict::Equivalent) => equivalent += 1,
            Ok(_) => different += 1,
            Err(e) => return Err(format!("pair {i}: {e}")),
        }
    }
    ensure(equivalent >= 20 && different >= 20, "pairs are too one-sided")?;
    within(start, Duration::from_secs(300))?;
    Ok(format!("150 pairs, {equivalent} equivalent, {different} with counterexamples, 0 disagreements"))
}

#[derive(serde::Deserialize)]
struct Expectation {
    problem: String,
    file: String,
    expect: String,
}

fn golden_conformance(corpus: &Corpus) -> Outcome {
    let dir = root().join("fixtures/solutions");
    let text = std::fs::read_to_string(dir.join("expected.json")).map_err(|e| e.to_string())?;
    let table: Vec<Expectation> = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let mut passing = BTreeSet::new();
    let mut mutants = 0;
    for e in &table {
        let p = corpus.get(&e.problem).map_err(|x| x.to_string())?;
        let code = std::fs::read_to_string(dir.join(&e.file)).map_err(|x| x.to_string())?;
        let got = match grade_code(p, &code, &EquivConfig::for_problem(p)).outcome {
            Ok(()) => "Pass".to_string(),
            Err(k) => k.to_string(),
        };
        ensure(got == e.expect, format!("{}: expected {}, got {got}", e.file, e.expect))?;
        if got == "Pass" {
            passing.insert(e.problem.as_str());
        } else {
            mutants += 1;
        }
    }
    for id in ["Fsm1", "Fsm2", "Fsm3comb", "Fsm3", "Fsm3onehot", "Lemmings1"] {
        ensure(passing.contains(id), format!("no passing solution for {id}"))?;
    }
    ensure(mutants >= 10, format!("only {mutants} mutants"))?;
    Ok(format!("{} correct solutions pass, {mutants} mutants fail as expected", table.len() - mutants))
}

fn reset_semantics(corpus: &Corpus) -> Outcome {
    let dir = root().join("fixtures/solutions");
    let outcome = |problem: &str, file: &str| -> Result<Compliance, String> {
        let p = corpus.get(problem).map_err(|e| e.to_string())?;
        let code = std::fs::read_to_string(dir.join(file)).map_err(|e| e.to_string())?;
        let (d, _) = compile(p, &code).map_err(|(k, _)| k.to_string())?;
        Ok(reset_compliance(&d, &p.golden).map_err(|e| e.to_string())?.outcome)
    };
    let cases = [
        ("Fsm1s", "Fsm1s/correct.sv", Compliance::Ok),
        ("Fsm1s", "Fsm1s/async_reset.sv", Compliance::Violation(ResetViolation::AsyncWhereSyncRequired)),
        ("Fsm1", "Fsm1/correct.sv", Compliance::Ok),
        ("Fsm1", "Fsm1/sync_reset.sv", Compliance::Violation(ResetViolation::SyncWhereAsyncRequired)),
    ];
    for (problem, file, want) in cases {
        let got = outcome(problem, file)?;
        ensure(got == want, format!("{file}: expected {want:?}, got {got:?}"))?;
    }
    Ok("sync-required and async-required problems each accept one style and flag the other".into())
}

fn prompt_fidelity(corpus: &Corpus) -> Outcome {
    let dir = root().join("fixtures/prompts");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "md"))
        .collect();
    files.sort();
    for path in &files {
        let stem = path.file_stem().unwrap().to_string_lossy().to_string();
        let (problem, variant) = stem.split_once('.').map_or((stem.as_str(), None), |(a, b)| (a, Some(b)));
        let p = corpus.get(problem).map_err(|e| e.to_string())?;
        let doc = build_systematic_prompt(p, corpus.predecessor(p));
        let rendered = match variant {
            None => render(&doc),
            Some("cot-multishot") => build_multishot_plan(p).messages(&doc).join("\n---\n\n"),
            Some(patch) => {
                render(&apply_top_patch(&doc, &TopPatch::builtin(patch).map_err(|e| e.to_string())?).unwrap())
            }
        };
        let want = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        ensure(rendered == want, format!("{} does not match the rendered prompt", path.display()))?;
    }

    let p = corpus.get("Lemmings1").map_err(|e| e.to_string())?;
    let doc = build_systematic_prompt(p, None);
    for (patch, first) in [
        ("sync-reset", "1. Explain synchronous reset and give a basic example."),
        ("one-hot", "1. Explain \"derive equations by inspection\"."),
    ] {
        let text = render(&apply_top_patch(&doc, &TopPatch::builtin(patch).unwrap()).unwrap());
        let marks = [
            "Act as a professional SystemVerilog programmer.",
            "### Specification",
            "### Example Behavior",
            "### Module Declaration",
            "### To-do",
        ];
        let mut at = 0;
        for m in marks {
            let i = text[at..].find(m).ok_or(format!("{patch}: '{m}' missing or out of order"))?;
            at += i + m.len();
        }
        ensure(text.starts_with(marks[0]), "preamble is not first")?;
        let todo = &text[text.rfind("### To-do").unwrap()..];
        ensure(todo.lines().nth(2) == Some(first), format!("{patch}: first item {:?}", todo.lines().nth(2)))?;
        ensure(!todo["### To-do".len()..].contains("###"), "To-do is not the last section")?;
    }
    Ok(format!("{} golden prompts match; section order and To-do items verified", files.len()))
}

fn simulator_properties(corpus: &Corpus) -> Outcome {
    let swap = common::design(
        "module m(input clk, input load, output logic a, output logic b);
         always_ff @(posedge clk) begin
             if (load) begin a <= 1; b <= 0; end
             else begin a <= b; b <= a; end
         end
         endmodule",
    );
    let mut sim = Simulator::new(&swap);
    let mut pairs = Vec::new();
    for load in [1, 0, 0] {
        sim.set_input("load", load).unwrap();
        sim.settle().unwrap();
        sim.tick().unwrap();
        pairs.push((sim.value("a").unwrap().to_u64(), sim.value("b").unwrap().to_u64()));
    }
    ensure(
        pairs == [(Some(1), Some(0)), (Some(0), Some(1)), (Some(1), Some(0))],
        format!("swap: {pairs:?}"),
    )?;

    let ring = common::design(
        "module m(input en, output o);
         wire a, b;
         assign a = ~(b & en);
         assign b = a;
         assign o = b;
         endmodule",
    );
    let mut sim = Simulator::new(&ring);
    sim.set_input("en", 0).unwrap();
    ensure(sim.settle().is_ok(), "a disabled ring settles")?;
    sim.set_input("en", 1).unwrap();
    ensure(matches!(sim.settle(), Err(SimError::CombLoop { .. })), "an enabled ring is a comb loop")?;
    let p = corpus.get("Fsm3comb").unwrap();
    let code = std::fs::read_to_string(root().join("fixtures/solutions/Fsm3comb/comb_loop.sv")).unwrap();
    ensure(
        grade_code(p, &code, &EquivConfig::for_problem(p)).outcome == Err(FailureKind::CombLoop),
        "comb-loop solution grades as CombLoop",
    )?;

    let designs = common::sample_designs();
    let built: Vec<_> = designs.iter().map(|(p, s)| (p, common::design(s))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e771e);
    for i in 0..1000 {
        let (p, d) = &built[i % built.len()];
        let pin = p.reset_port().map(|r| ResetPin {
            name: r.name.clone(),
            active_high: p.golden.reset_active_high,
        });
        let script = common::random_script(&mut rng, p);
        common::check_extra_settle(&mut rng, d, &script, pin.as_ref()).map_err(|e| format!("{}: {e}", p.id))?;
    }
    Ok(format!("swap, comb loop, extra settle over 1000 scripts on {} designs", built.len()))
}

fn fuzz_safety() -> Outcome {
    let seeds: Vec<String> = common::sample_designs().into_iter().map(|(_, s)| s).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xf022);
    let mut max = 0;
    for _ in 0..10_000 {
        let input = common::fuzz_input(&mut rng, &seeds);
        max = max.max(input.len());
        common::front_end_survives(&input)?;
    }
    ensure(max <= 4096, "inputs stay within 4 KiB")?;
    Ok("10000 inputs up to 4 KiB, no panics".into())
}

#[test]
fn acceptance_criteria() {
    let corpus = bundled_corpus().unwrap();
    let criteria: Vec<Criterion> = vec![
        ("score arithmetic", Box::new(score_arithmetic)),
        ("replay benchmark", Box::new(|| replay_benchmark(&corpus))),
        ("equivalence oracle", Box::new(equivalence_oracle)),
        ("golden conformance", Box::new(|| golden_conformance(&corpus))),
        ("reset semantics", Box::new(|| reset_semantics(&corpus))),
        ("prompt fidelity", Box::new(|| prompt_fidelity(&corpus))),
        ("simulator properties", Box::new(|| simulator_properties(&corpus))),
        ("fuzz safety", Box::new(fuzz_safety)),
    ];
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = BTreeMap::new();
    let mut out = std::io::stdout().lock();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let elapsed = start.elapsed();
        let line = match &result {
            Ok(detail) => format!("criterion {} {name}: PASS ({elapsed:.2?}) {detail}", i + 1),
            Err(e) => format!("criterion {} {name}: FAIL ({elapsed:.2?}) {e}", i + 1),
        };
        let _ = writeln!(out, "{line}");
        if let Err(e) = result {
            failed.insert(i + 1, e);
        }
    }
    std::panic::set_hook(hook);
    assert!(failed.is_empty(), "failed criteria: {failed:#?}");
}

