//! Published per-problem star counts, rescored with the benchmark's own
//! arithmetic.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::report::{ConfigRow, ProblemRow};
use super::{io_err, Cell, EvalError, RunReport, ScoreTable, REPORT_SCHEMA};
use crate::corpus::Corpus;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrintedTotals {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problems_solved: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub percent: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceColumn {
    pub name: String,
    /// Successes per problem, in the table's problem order.
    pub stars: Vec<u32>,
    #[serde(default)]
    pub printed: PrintedTotals,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceTable {
    pub name: String,
    pub trials: u32,
    pub problems: Vec<String>,
    pub columns: Vec<ReferenceColumn>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceTables {
    pub tables: Vec<ReferenceTable>,
}

impl ReferenceTables {
    pub fn load(path: &Path) -> Result<ReferenceTables, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let t: ReferenceTables = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
        for table in &t.tables {
            table.check().map_err(|m| io_err(path, m))?;
        }
        Ok(t)
    }
}

impl ReferenceTable {
    pub fn check(&self) -> Result<(), String> {
        for c in &self.columns {
            if c.stars.len() != self.problems.len() {
                return Err(format!("{}/{}: {} counts for {} problems", self.name, c.name, c.stars.len(), self.problems.len()));
            }
            if c.stars.iter().any(|&k| k > self.trials) {
                return Err(format!("{}/{}: a count exceeds {} trials", self.name, c.name, self.trials));
            }
        }
        Ok(())
    }

    pub fn scores(&self) -> ScoreTable {
        let cells = self
            .columns
            .iter()
            .map(|c| {
                let row = self
                    .problems
                    .iter()
                    .zip(&c.stars)
                    .map(|(p, &k)| (p.clone(), Cell { k, n: self.trials }))
                    .collect::<BTreeMap<_, _>>();
                (c.name.clone(), row)
            })
            .collect();
        ScoreTable::from_cells(cells)
    }

    /// Differences between printed and recomputed totals, one line each.
    pub fn discrepancies(&self) -> Vec<String> {
        let scores = self.scores();
        let mut out = Vec::new();
        for c in &self.columns {
            let t = scores.totals[&c.name];
            if let Some(p) = c.printed.percent.filter(|&p| p != t.success_rate_percent) {
                out.push(format!(
                    "{}: printed success rate {p}%, the per-problem counts give {}/{} = {}%",
                    c.name, t.success_rate.0, t.success_rate.1, t.success_rate_percent
                ));
            }
            if let Some(s) = c.printed.problems_solved.filter(|&s| s != t.problems_solved) {
                out.push(format!(
                    "{}: printed {s} problems solved, the per-problem counts give {}",
                    c.name, t.problems_solved
                ));
            }
        }
        out
    }

    /// A results-free report; titles come from `corpus` when it knows the id.
    pub fn to_report(&self, corpus: Option<&Corpus>) -> RunReport {
        RunReport {
            schema: REPORT_SCHEMA,
            run_id: self.name.clone(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: String::new(),
            finished_at: String::new(),
            problems: self
                .problems
                .iter()
                .map(|id| ProblemRow {
                    id: id.clone(),
                    title: corpus
                        .and_then(|c| c.get(id).ok())
                        .map_or_else(|| id.clone(), |p| p.title.clone()),
                })
                .collect(),
            configs: self
                .columns
                .iter()
                .map(|c| ConfigRow {
                    name: c.name.clone(),
                    patch: None,
                    multishot: false,
                    feedback_rounds: 0,
                    trials: self.trials,
                })
                .collect(),
            results: Vec::new(),
            scores: self.scores(),
            notes: self.discrepancies(),
        }
    }
}
