use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::report::{ConfigRow, ProblemRow};
use super::{
    compile, grade_code, io_err, score, write_report, Artifacts, EvalError, FailureKind, NamedConfig, RunConfig,
    RunReport, TrialResult, TrialVerdict, REPORT_SCHEMA,
};
use crate::corpus::{Corpus, ProblemSpec};
use crate::gateway::{extract_code, open_session, ChatMessage, ChatSession, ProviderConfig, SessionConfig};
use crate::golden::{EquivConfig, Verdict};
use crate::prompt::{apply_top_patch, build_multishot_plan, build_systematic_prompt, render, TopPatch};
use crate::sim::to_vcd;
use crate::sv::format_diagnostics;

/// Turns compiler output into the next user message; receives the session
/// id and the formatted diagnostics.
pub type FeedbackFn<'f> = dyn Fn(&str, &str) -> String + Sync + 'f;

pub struct TrialContext<'a> {
    pub corpus: &'a Corpus,
    pub config: &'a NamedConfig,
    pub patch: Option<&'a TopPatch>,
    pub equiv: &'a EquivConfig,
    /// Where artifacts go; nothing is written when `None`.
    pub run_dir: Option<&'a Path>,
    /// Replaces the verbatim diagnostics in feedback rounds.
    pub feedback: Option<&'a FeedbackFn<'a>>,
}

pub fn session_id(problem: &str, config: &str, trial: u32) -> String {
    format!("{problem}/{config}/trial-{trial}")
}

struct Writer {
    dir: Option<PathBuf>,
    rel: String,
    artifacts: Artifacts,
    errors: Vec<String>,
}

impl Writer {
    fn new(run_dir: Option<&Path>, config: &str, problem: &str, trial: u32) -> Self {
        let rel = format!("{config}/{problem}/trial-{trial}");
        let dir = run_dir.map(|d| d.join(&rel));
        let mut errors = Vec::new();
        if let Some(d) = &dir {
            if let Err(e) = std::fs::create_dir_all(d) {
                errors.push(format!("cannot create {}: {e}", d.display()));
            }
        }
        Writer {
            dir,
            rel,
            artifacts: Artifacts::default(),
            errors,
        }
    }

    fn write(&mut self, name: &str, text: &str) -> Option<String> {
        let dir = self.dir.as_ref()?;
        let path = dir.join(name);
        match std::fs::write(&path, text) {
            Ok(()) => Some(format!("{}/{name}", self.rel)),
            Err(e) => {
                self.errors.push(format!("cannot write {}: {e}", path.display()));
                None
            }
        }
    }
}

struct Outcome {
    verdict: TrialVerdict,
    rounds_used: u32,
    detail: String,
}

fn fail(kind: FailureKind, rounds_used: u32, detail: impl Into<String>) -> Outcome {
    Outcome {
        verdict: TrialVerdict::Fail(kind),
        rounds_used,
        detail: detail.into(),
    }
}

fn drive(
    p: &ProblemSpec,
    ctx: &TrialContext,
    sid: &str,
    messages: &[String],
    session: &mut dyn ChatSession,
    w: &mut Writer,
) -> Outcome {
    let mut reply: Option<ChatMessage> = None;
    for m in messages {
        match session.send(m) {
            Ok(r) => reply = Some(r),
            Err(e) => return fail(FailureKind::TransportError, 0, e.to_string()),
        }
    }
    let Some(mut reply) = reply else {
        return fail(FailureKind::TransportError, 0, "no message was sent");
    };
    let mut rounds = 0;
    loop {
        let code = match extract_code(&reply) {
            Ok(x) => x.code,
            Err(e) => {
                w.artifacts.diagnostics = w.write("diagnostics.txt", &format!("{e}\n"));
                return fail(FailureKind::ExtractionFailure, rounds, e.to_string());
            }
        };
        w.artifacts.code = w.write("code.sv", &code);
        if let Err((_, diags)) = compile(p, &code) {
            if rounds < ctx.config.feedback_rounds {
                let text = format_diagnostics(&diags, &code);
                let msg = ctx.feedback.map_or_else(|| text.clone(), |f| f(sid, &text));
                rounds += 1;
                match session.send(&msg) {
                    Ok(r) => reply = r,
                    Err(e) => return fail(FailureKind::TransportError, rounds, e.to_string()),
                }
                continue;
            }
        }
        let grade = grade_code(p, &code, ctx.equiv);
        w.artifacts.diagnostics = w.write("diagnostics.txt", &grade.report(&code));
        if let Some(Verdict::Counterexample(cx)) = &grade.verdict {
            let json = serde_json::to_string_pretty(cx).expect("counterexamples serialize");
            w.artifacts.counterexample = w.write("counterexample.json", &json);
            w.write("counterexample.vcd", &to_vcd(&p.module_name, &cx.dut_trace));
        }
        return match grade.outcome {
            Ok(()) => Outcome {
                verdict: TrialVerdict::Pass,
                rounds_used: rounds,
                detail: grade.detail,
            },
            Err(kind) => fail(kind, rounds, grade.detail),
        };
    }
}

/// One trial in a fresh session. Failures of any kind become the result's
/// verdict; nothing here aborts a run.
pub fn run_trial(p: &ProblemSpec, ctx: &TrialContext, trial: u32) -> TrialResult {
    let sid = session_id(&p.id, &ctx.config.name, trial);
    let mut w = Writer::new(ctx.run_dir, &ctx.config.name, &p.id, trial);
    let mut doc = build_systematic_prompt(p, ctx.corpus.predecessor(p));
    if let Some(patch) = ctx.patch {
        doc = apply_top_patch(&doc, patch).expect("a fresh document has no patch");
    }
    let messages = if ctx.config.multishot {
        build_multishot_plan(p).messages(&doc)
    } else {
        vec![render(&doc)]
    };
    w.artifacts.prompt = w.write("prompt.md", &messages.join("\n---\n\n"));

    let cfg = SessionConfig {
        provider: ctx.config.provider.clone(),
        session_id: sid.clone(),
    };
    let outcome = match open_session(&cfg) {
        Ok(mut session) => {
            let o = drive(p, ctx, &sid, &messages, session.as_mut(), &mut w);
            let t = serde_json::to_string_pretty(session.transcript()).expect("transcripts serialize");
            w.artifacts.transcript = w.write("transcript.json", &(t + "\n"));
            o
        }
        Err(e) => fail(FailureKind::TransportError, 0, e.to_string()),
    };
    let mut detail = outcome.detail;
    for e in &w.errors {
        detail.push_str(&format!("; {e}"));
    }
    if w.artifacts.diagnostics.is_none() {
        w.artifacts.diagnostics = w.write("diagnostics.txt", &format!("{detail}\n"));
    }
    let result = TrialResult {
        problem: p.id.clone(),
        config: ctx.config.name.clone(),
        trial,
        verdict: outcome.verdict,
        rounds_used: outcome.rounds_used,
        detail,
        artifacts: w.artifacts.clone(),
    };
    let json = serde_json::to_string_pretty(&result).expect("results serialize");
    w.write("result.json", &(json + "\n"));
    result
}

fn validate(rc: &RunConfig, corpus: &Corpus) -> Result<Vec<Option<TopPatch>>, EvalError> {
    let fatal = |m: String| Err(EvalError::FatalConfig(m));
    if rc.problems.is_empty() {
        return fatal("the problem list is empty".into());
    }
    if rc.configs.is_empty() {
        return fatal("the config list is empty".into());
    }
    for id in &rc.problems {
        if corpus.get(id).is_err() {
            return fatal(format!("unknown problem '{id}'"));
        }
    }
    let mut names = BTreeSet::new();
    let mut patches = Vec::new();
    for c in &rc.configs {
        if c.name.is_empty() || c.name.contains(['/', '\\']) {
            return fatal(format!("invalid config name '{}'", c.name));
        }
        if !names.insert(c.name.as_str()) {
            return fatal(format!("duplicate config name '{}'", c.name));
        }
        if c.trials == 0 {
            return fatal(format!("config '{}' must run at least one trial", c.name));
        }
        match &c.provider {
            ProviderConfig::LiveHttp(h) if std::env::var(&h.api_key_env).is_err() => {
                return fatal(format!("config '{}': environment variable {} is not set", c.name, h.api_key_env));
            }
            ProviderConfig::Replay { dir } if !dir.is_dir() => {
                return fatal(format!("config '{}': replay directory {} not found", c.name, dir.display()));
            }
            _ => {}
        }
        patches.push(match &c.patch {
            None => None,
            Some(s) => Some(TopPatch::resolve(s).map_err(|e| EvalError::FatalConfig(format!("config '{}': {e}", c.name)))?),
        });
    }
    Ok(patches)
}

/// Runs problems x configs x trials and writes the run directory.
pub fn run_benchmark(rc: &RunConfig, corpus: &Corpus, feedback: Option<&FeedbackFn<'_>>) -> Result<RunReport, EvalError> {
    let patches = validate(rc, corpus)?;
    let started_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let run_id = rc
        .run_id
        .clone()
        .unwrap_or_else(|| format!("run-{}", chrono::Utc::now().format("%Y%m%d-%H%M%S")));
    let run_dir = rc.output_dir.join(&run_id);
    std::fs::create_dir_all(&run_dir).map_err(|e| io_err(&run_dir, e))?;

    let mut equiv = EquivConfig::default();
    if let Some(seed) = rc.seed {
        equiv.random_fallback.seed = seed;
    }
    let equiv_per_problem: Vec<EquivConfig> = rc
        .problems
        .iter()
        .map(|id| {
            let mut e = EquivConfig::for_problem(corpus.get(id).expect("validated"));
            e.random_fallback = equiv.random_fallback.clone();
            e
        })
        .collect();

    let mut jobs = Vec::new();
    for (pi, _) in rc.problems.iter().enumerate() {
        for (ci, c) in rc.configs.iter().enumerate() {
            for t in 0..c.trials {
                jobs.push((pi, ci, t));
            }
        }
    }
    let slots: Mutex<Vec<Option<TrialResult>>> = Mutex::new(vec![None; jobs.len()]);
    let next = AtomicUsize::new(0);
    let workers = rc.workers.clamp(1, jobs.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(pi, ci, t)) = jobs.get(i) else { break };
                let p = corpus.get(&rc.problems[pi]).expect("validated");
                let ctx = TrialContext {
                    corpus,
                    config: &rc.configs[ci],
                    patch: patches[ci].as_ref(),
                    equiv: &equiv_per_problem[pi],
                    run_dir: Some(&run_dir),
                    feedback,
                };
                let r = run_trial(p, &ctx, t);
                slots.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(r);
            });
        }
    });
    let results: Vec<TrialResult> = slots
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect();
    let scores = score(&results)?;
    let report = RunReport {
        schema: REPORT_SCHEMA,
        run_id,
        seed: rc.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        problems: rc
            .problems
            .iter()
            .map(|id| ProblemRow {
                id: id.clone(),
                title: corpus.get(id).expect("validated").title.clone(),
            })
            .collect(),
        configs: rc
            .configs
            .iter()
            .enumerate()
            .map(|(ci, c)| ConfigRow {
                name: c.name.clone(),
                patch: patches[ci].as_ref().map(|p| p.id.clone()),
                multishot: c.multishot,
                feedback_rounds: c.feedback_rounds,
                trials: c.trials,
            })
            .collect(),
        results,
        scores,
        notes: Vec::new(),
    };
    write_report(&report, &run_dir)?;
    Ok(report)
}
