use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, Cell, EvalError, FailureKind, ScoreTable, TrialResult, TrialVerdict};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemRow {
    pub id: String,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigRow {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<String>,
    pub multishot: bool,
    pub feedback_rounds: u32,
    pub trials: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub run_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
    pub problems: Vec<ProblemRow>,
    pub configs: Vec<ConfigRow>,
    pub results: Vec<TrialResult>,
    pub scores: ScoreTable,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Json,
}

fn stars(c: &Cell) -> String {
    let k = c.k.min(c.n) as usize;
    format!("{}/{} {}{}", c.k, c.n, "★".repeat(k), "☆".repeat(c.n as usize - k))
}

fn table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
}

fn markdown(r: &RunReport) -> String {
    let scores = r.scores.recomputed();
    let mut out = String::from("# Benchmark report\n\n");
    let mut header = vec!["Problem".to_string()];
    header.extend(r.configs.iter().map(|c| c.name.clone()));
    let mut rows: Vec<Vec<String>> = r
        .problems
        .iter()
        .map(|p| {
            let mut row = vec![p.title.clone()];
            for c in &r.configs {
                let cell = scores.cells.get(&c.name).and_then(|m| m.get(&p.id));
                row.push(cell.map_or("-".into(), stars));
            }
            row
        })
        .collect();
    let totals = |f: &dyn Fn(&super::Totals) -> String| {
        r.configs
            .iter()
            .map(|c| scores.totals.get(&c.name).map_or("-".into(), f))
            .collect::<Vec<_>>()
    };
    let mut solved = vec!["# of Problem Solved Successfully".to_string()];
    solved.extend(totals(&|t| t.problems_solved.to_string()));
    let mut rate = vec!["Total Success Rate".to_string()];
    rate.extend(totals(&|t| format!("{}%", t.success_rate_percent)));
    rows.push(solved);
    rows.push(rate);
    table(&mut out, &header, &rows);

    let mut kinds: BTreeMap<(FailureKind, &str), u32> = BTreeMap::new();
    for t in &r.results {
        if let TrialVerdict::Fail(k) = t.verdict {
            *kinds.entry((k, t.config.as_str())).or_default() += 1;
        }
    }
    if !kinds.is_empty() {
        out.push_str("\n## Failure kinds\n\n");
        let mut header = vec!["Failure kind".to_string()];
        header.extend(r.configs.iter().map(|c| c.name.clone()));
        let rows: Vec<Vec<String>> = FailureKind::ALL
            .iter()
            .filter(|k| kinds.keys().any(|(kk, _)| kk == *k))
            .map(|k| {
                let mut row = vec![k.to_string()];
                row.extend(
                    r.configs
                        .iter()
                        .map(|c| kinds.get(&(*k, c.name.as_str())).copied().unwrap_or(0).to_string()),
                );
                row
            })
            .collect();
        table(&mut out, &header, &rows);
    }

    if !r.results.is_empty() {
        out.push_str("\n## Configurations\n\n");
        for c in &r.configs {
            let _ = writeln!(
                out,
                "- {}: patch {}, multi-shot {}, feedback rounds {}, {} trials",
                c.name,
                c.patch.as_deref().unwrap_or("none"),
                if c.multishot { "yes" } else { "no" },
                c.feedback_rounds,
                c.trials
            );
        }
    }
    if !r.notes.is_empty() {
        out.push_str("\n## Notes\n\n");
        for n in &r.notes {
            let _ = writeln!(out, "- {n}");
        }
    }
    out
}

/// Markdown omits run id and timestamps so identical runs render identically.
pub fn emit_report(r: &RunReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => markdown(r),
        ReportFormat::Json => {
            let mut r = r.clone();
            r.scores = r.scores.recomputed();
            serde_json::to_string_pretty(&r).expect("reports serialize") + "\n"
        }
    }
}

/// Writes `report.md` and `report.json` into `dir`.
pub fn write_report(r: &RunReport, dir: &Path) -> Result<(), EvalError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for (name, fmt) in [("report.md", ReportFormat::Markdown), ("report.json", ReportFormat::Json)] {
        let path = dir.join(name);
        std::fs::write(&path, emit_report(r, fmt)).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

impl RunReport {
    pub fn load(path: &Path) -> Result<RunReport, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        serde_json::from_str(&text).map_err(|e| io_err(path, e))
    }
}
