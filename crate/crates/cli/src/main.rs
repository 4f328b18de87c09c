//! Command-line front end. Exit status: 0 success, 1 scored failure,
//! 2 operational error.

use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fsmsmith::corpus::{bundled_corpus, Corpus, ProblemSpec, StimulusScript};
use fsmsmith::eval::{
    compile, emit_report, grade_code, run_benchmark, FeedbackFn, ReferenceTables, ReportFormat, RunConfig, RunReport,
};
use fsmsmith::gateway::ProviderConfig;
use fsmsmith::golden::{equiv_check, golden_run, EquivConfig, Verdict};
use fsmsmith::prompt::{apply_top_patch, build_multishot_plan, build_systematic_prompt, render, TopPatch};
use fsmsmith::sim::{self, ObsKind, ResetPin, Trace};
use fsmsmith::sv::format_diagnostics;

#[derive(Parser)]
#[command(name = "fsmsmith", version, about = "Benchmark harness for LLM-generated SystemVerilog state machines")]
struct Cli {
    /// Directory of *.problem.json files; the bundled corpus when absent.
    #[arg(long, global = true, env = "FSMSMITH_CORPUS")]
    corpus: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prompt construction.
    #[command(subcommand)]
    Prompt(PromptCmd),
    /// List the problems in the corpus.
    Problems,
    /// Parse, elaborate and interface-check a solution.
    Check(SolutionArgs),
    /// Simulate a solution against the golden model.
    Sim(SimArgs),
    /// Check a solution for equivalence with the golden model.
    Equiv(SolutionArgs),
    /// Grade a solution the way a benchmark trial does.
    Grade(SolutionArgs),
    /// Benchmark runs.
    #[command(subcommand)]
    Bench(BenchCmd),
    /// Render a stored run report, or rescore reference star counts.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum PromptCmd {
    /// Print the prompt for a problem; multi-shot messages are separated by `---`.
    Render {
        problem: String,
        /// Built-in patch id or path to a patch file.
        #[arg(long)]
        patch: Option<String>,
        #[arg(long)]
        multishot: bool,
    },
}

#[derive(Args)]
struct SolutionArgs {
    file: PathBuf,
    #[arg(long)]
    problem: String,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    solution: SolutionArgs,
    /// Stimulus script as JSON; the problem's example waveform when absent.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Write the design's trace as a VCD file.
    #[arg(long)]
    vcd: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Run a benchmark configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Provider for every config: `replay:<dir>` or a JSON provider file.
        #[arg(long)]
        provider_override: Option<String>,
        /// Ask on the terminal for each feedback message.
        #[arg(long)]
        interactive: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Md,
    Json,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directory or report.json.
    #[arg(required_unless_present = "reference", conflicts_with = "reference")]
    run: Option<PathBuf>,
    /// Reference star-count tables to rescore.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "md")]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` is a scored failure.
fn execute(cli: Cli) -> Result<bool> {
    let corpus = || -> Result<Corpus> {
        match &cli.corpus {
            Some(dir) => Corpus::load_dir(dir).with_context(|| format!("loading corpus {}", dir.display())),
            None => Ok(bundled_corpus()?),
        }
    };
    match &cli.command {
        Command::Prompt(PromptCmd::Render {
            problem,
            patch,
            multishot,
        }) => {
            let corpus = corpus()?;
            let p = corpus.get(problem)?;
            let mut doc = build_systematic_prompt(p, corpus.predecessor(p));
            if let Some(patch) = patch {
                doc = apply_top_patch(&doc, &TopPatch::resolve(patch)?)?;
            }
            if *multishot {
                print!("{}", build_multishot_plan(p).messages(&doc).join("\n---\n\n"));
            } else {
                print!("{}", render(&doc));
            }
            Ok(true)
        }
        Command::Problems => {
            for p in corpus()?.problems() {
                println!("{}\t{}", p.id, p.title);
            }
            Ok(true)
        }
        Command::Check(a) => {
            let corpus = corpus()?;
            let (p, code) = solution(&corpus, a)?;
            match compile(p, &code) {
                Ok((_, warnings)) => {
                    if !warnings.is_empty() {
                        eprint!("{}", format_diagnostics(&warnings, &code));
                    }
                    println!("result: ok");
                    Ok(true)
                }
                Err((kind, diags)) => {
                    eprint!("{}", format_diagnostics(&diags, &code));
                    println!("result: {kind}");
                    Ok(false)
                }
            }
        }
        Command::Sim(a) => simulate(&corpus()?, a),
        Command::Equiv(a) => {
            let corpus = corpus()?;
            let (p, code) = solution(&corpus, a)?;
            let d = match compile(p, &code) {
                Ok((d, _)) => d,
                Err((kind, diags)) => {
                    eprint!("{}", format_diagnostics(&diags, &code));
                    println!("result: {kind}");
                    return Ok(false);
                }
            };
            let verdict = equiv_check(&d, &p.golden, &EquivConfig::for_problem(p));
            let verdict = match verdict {
                Ok(v) => v,
                Err(e) => {
                    println!("result: {e}");
                    return Ok(false);
                }
            };
            match &verdict {
                Verdict::Equivalent => println!("result: equivalent"),
                Verdict::Counterexample(cx) => {
                    println!("result: counterexample");
                    for (i, values) in cx.inputs.iter().enumerate() {
                        let v: Vec<String> = values.iter().map(|(n, x)| format!("{n}={x}")).collect();
                        println!("cycle {i}: {}", v.join(" "));
                    }
                    println!(
                        "output {}: expected {}, got {}",
                        cx.output, cx.expected[&cx.output], cx.actual[&cx.output]
                    );
                }
                Verdict::Inconclusive(reason) => println!("result: inconclusive ({reason})"),
            }
            Ok(verdict == Verdict::Equivalent)
        }
        Command::Grade(a) => {
            let corpus = corpus()?;
            let (p, code) = solution(&corpus, a)?;
            let g = grade_code(p, &code, &EquivConfig::for_problem(p));
            if !g.diagnostics.is_empty() {
                eprint!("{}", format_diagnostics(&g.diagnostics, &code));
            }
            print!("{}", g.report(&code));
            Ok(g.outcome.is_ok())
        }
        Command::Bench(BenchCmd::Run {
            config,
            provider_override,
            interactive,
        }) => {
            let mut rc = RunConfig::load(config)?;
            if let Some(spec) = provider_override {
                let provider = parse_provider(spec)?;
                for c in &mut rc.configs {
                    c.provider = provider.clone();
                }
            }
            let corpus = corpus()?;
            let report = if *interactive {
                rc.workers = 1;
                let lock = Mutex::new(());
                let ask = move |sid: &str, diags: &str| -> String {
                    let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
                    ask_feedback(sid, diags)
                };
                run_benchmark(&rc, &corpus, Some(&ask as &FeedbackFn))?
            } else {
                run_benchmark(&rc, &corpus, None)?
            };
            print!("{}", emit_report(&report, ReportFormat::Markdown));
            println!("\nrun directory: {}", rc.output_dir.join(&report.run_id).display());
            Ok(true)
        }
        Command::Report(a) => {
            let format = match a.format {
                Format::Md => ReportFormat::Markdown,
                Format::Json => ReportFormat::Json,
            };
            if let Some(path) = &a.reference {
                let tables = ReferenceTables::load(path)?;
                let corpus = corpus().ok();
                let mut out = Vec::new();
                for t in &tables.tables {
                    let r = t.to_report(corpus.as_ref());
                    out.push(match format {
                        ReportFormat::Markdown => format!("<!-- {} -->\n{}", t.name, emit_report(&r, format)),
                        ReportFormat::Json => emit_report(&r, format),
                    });
                }
                print!("{}", out.join("\n"));
                return Ok(true);
            }
            let path = a.run.as_ref().expect("clap requires a run or a reference");
            let file = if path.is_dir() { path.join("report.json") } else { path.clone() };
            print!("{}", emit_report(&RunReport::load(&file)?, format));
            Ok(true)
        }
    }
}

fn solution<'c>(corpus: &'c Corpus, a: &SolutionArgs) -> Result<(&'c ProblemSpec, String)> {
    let p = corpus.get(&a.problem)?;
    let code = std::fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    Ok((p, code))
}

fn parse_provider(spec: &str) -> Result<ProviderConfig> {
    if let Some(dir) = spec.strip_prefix("replay:") {
        return Ok(ProviderConfig::Replay { dir: dir.into() });
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading provider file {spec}"))?;
    serde_json::from_str(&text).with_context(|| format!("parsing provider file {spec}"))
}

/// Reads a feedback message from the terminal, ended by a line holding `.`
/// or end of input. An empty message sends the diagnostics unchanged.
fn ask_feedback(session_id: &str, diags: &str) -> String {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "\n== {session_id}: compiler output ==\n{diags}");
    let _ = writeln!(err, "Type the feedback message, then a line with a single '.' (empty sends the output above):");
    let mut lines = Vec::new();
    for line in std::io::stdin().lock().lines() {
        let Ok(line) = line else { break };
        if line == "." {
            break;
        }
        lines.push(line);
    }
    if lines.iter().all(|l| l.trim().is_empty()) {
        diags.to_string()
    } else {
        lines.join("\n") + "\n"
    }
}

fn simulate(corpus: &Corpus, a: &SimArgs) -> Result<bool> {
    let (p, code) = solution(corpus, &a.solution)?;
    let script = match (&a.script, &p.waveform) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let s: StimulusScript =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if let Err(m) = s.check(p) {
                bail!("{}: {m}", path.display());
            }
            s
        }
        (None, Some(w)) => StimulusScript::from_waveform(p, w),
        (None, None) => bail!("problem {} has no example waveform; pass --script", p.id),
    };
    let d = match compile(p, &code) {
        Ok((d, _)) => d,
        Err((kind, diags)) => {
            eprint!("{}", format_diagnostics(&diags, &code));
            println!("result: {kind}");
            return Ok(false);
        }
    };
    let pin = p.reset_port().map(|r| ResetPin {
        name: r.name.clone(),
        active_high: p.golden.reset_active_high,
    });
    let trace = match sim::run(&d, &script, pin.as_ref()) {
        Ok(t) => t,
        Err(e) => {
            println!("result: {e}");
            return Ok(false);
        }
    };
    let golden = golden_run(&p.golden.compile()?, &script)?;
    if let Some(path) = &a.vcd {
        std::fs::write(path, sim::to_vcd(&p.module_name, &trace)).with_context(|| format!("writing {}", path.display()))?;
    }
    let mismatches = print_trace(&trace, &golden);
    if mismatches == 0 {
        println!("result: matches golden model");
    } else {
        println!("result: {mismatches} mismatching observation(s)");
    }
    Ok(mismatches == 0)
}

/// One line per observation; outputs that disagree with the golden model
/// show the expected value in brackets.
fn print_trace(trace: &Trace, golden: &Trace) -> usize {
    let mut bad = 0;
    for (s, g) in trace.snapshots.iter().zip(&golden.snapshots) {
        let kind = match s.kind {
            ObsKind::Tick => "tick",
            ObsKind::Settle => "settle",
        };
        let inputs: Vec<String> = s.inputs.iter().map(|(n, v)| format!("{n}={v}")).collect();
        let outputs: Vec<String> = s
            .outputs
            .iter()
            .map(|(n, v)| match g.outputs.get(n) {
                Some(e) if !v.matches_expected(e) => {
                    bad += 1;
                    format!("{n}={v} [{e}]")
                }
                _ => format!("{n}={v}"),
            })
            .collect();
        println!("{:>4} {:<6} cycle {:>3} | {} | {}", s.step, kind, s.cycle, inputs.join(" "), outputs.join(" "));
    }
    bad
}
