//! Trial orchestration, failure classification, scoring and reports.

mod grade;
mod reference;
mod report;
mod run;
mod score;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CorpusError;
use crate::gateway::ProviderConfig;

pub use grade::{compile, grade_code, Grade};
pub use reference::{PrintedTotals, ReferenceColumn, ReferenceTable, ReferenceTables};
pub use report::{emit_report, write_report, ConfigRow, ProblemRow, ReportFormat, RunReport, REPORT_SCHEMA};
pub use run::{run_benchmark, run_trial, session_id, FeedbackFn, TrialContext};
pub use score::{round_half_up_percent, score, Cell, ScoreTable, Totals};

/// Why a trial failed. Declaration order is the classification priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FailureKind {
    ExtractionFailure,
    UnsupportedConstruct,
    Syntax,
    MultiDriver,
    InterfaceMismatch,
    CombLoop,
    ResetStyleViolation,
    FunctionalMismatch,
    TransportError,
}

impl FailureKind {
    pub const ALL: [FailureKind; 9] = [
        FailureKind::ExtractionFailure,
        FailureKind::UnsupportedConstruct,
        FailureKind::Syntax,
        FailureKind::MultiDriver,
        FailureKind::InterfaceMismatch,
        FailureKind::CombLoop,
        FailureKind::ResetStyleViolation,
        FailureKind::FunctionalMismatch,
        FailureKind::TransportError,
    ];
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrialVerdict {
    Pass,
    Fail(FailureKind),
}

/// Artifact paths relative to the run directory.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifacts {
    pub prompt: Option<String>,
    pub transcript: Option<String>,
    pub code: Option<String>,
    pub diagnostics: Option<String>,
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    pub problem: String,
    pub config: String,
    pub trial: u32,
    pub verdict: TrialVerdict,
    pub rounds_used: u32,
    pub detail: String,
    pub artifacts: Artifacts,
}

impl TrialResult {
    pub fn passed(&self) -> bool {
        self.verdict == TrialVerdict::Pass
    }
}

fn default_trials() -> u32 {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedConfig {
    pub name: String,
    pub provider: ProviderConfig,
    /// Built-in patch id or path to a patch file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<String>,
    #[serde(default)]
    pub multishot: bool,
    #[serde(default)]
    pub feedback_rounds: u32,
    #[serde(default = "default_trials")]
    pub trials: u32,
}

fn default_workers() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problems: Vec<String>,
    pub configs: Vec<NamedConfig>,
    pub output_dir: PathBuf,
    /// Seed for the random-simulation fallback of the equivalence check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Directory name under `output_dir`; a timestamp when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_id: Option<String>,
}

impl RunConfig {
    /// Reads a JSON run configuration. Relative paths are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<RunConfig, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|e| EvalError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut rc: RunConfig =
            serde_json::from_str(&text).map_err(|e| EvalError::FatalConfig(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut rc.output_dir);
        for c in &mut rc.configs {
            if let ProviderConfig::Replay { dir } = &mut c.provider {
                rebase(dir);
            }
            if let Some(patch) = &mut c.patch {
                if crate::prompt::TopPatch::builtin(patch).is_err() && Path::new(patch.as_str()).is_relative() {
                    *patch = base.join(&*patch).display().to_string();
                }
            }
        }
        Ok(rc)
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid run configuration: {0}")]
    FatalConfig(String),
    #[error("inconsistent trials: {0}")]
    InconsistentTrials(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

pub(crate) fn io_err(path: &Path, e: impl ToString) -> EvalError {
    EvalError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}
