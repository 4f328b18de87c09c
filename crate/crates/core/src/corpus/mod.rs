//! Benchmark problems: schema, loading, validation and waveform tables.

mod bundled;
mod waveform;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::golden::{FsmModel, ResetKind};

pub use bundled::bundled_corpus;
pub use waveform::{parse_waveform, render_waveform, WaveformRow, WaveformTable};

pub const SCHEMA_VERSION: u32 = 1;
pub const PROBLEM_EXTENSION: &str = ".problem.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PortDirection {
    Input,
    Output,
}

impl PortDirection {
    pub fn keyword(self) -> &'static str {
        match self {
            PortDirection::Input => "input",
            PortDirection::Output => "output",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PortKind {
    Clock,
    Reset,
    Data,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortDecl {
    pub name: String,
    pub direction: PortDirection,
    pub width: u32,
    /// Index of the least significant bit, as in `[3:1]`.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub lsb: i64,
    pub kind: PortKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tag {
    SyncReset,
    AsyncReset,
    OneHot,
    Moore,
    Mealy,
    DerivedEquations,
    MultiPart,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        f.write_str(s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

/// Structural side condition for one-hot problems: the named signal must be
/// exactly one bit per state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneHotCheck {
    pub signal: String,
    pub states: u32,
}

/// Per-problem overrides of the equivalence-check limits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_input_bits_exhaustive: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_product_states: Option<u64>,
    /// Values enumerated for wide inputs during the exhaustive search; the
    /// random fallback still draws from the full range.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub input_domains: BTreeMap<String, Vec<u64>>,
}

impl EquivOverrides {
    fn is_empty(&self) -> bool {
        self.max_input_bits_exhaustive.is_none() && self.max_product_states.is_none() && self.input_domains.is_empty()
    }
}

fn is_zero(v: &i64) -> bool {
    *v == 0
}

fn default_module_name() -> String {
    "top_module".into()
}

fn is_default_module_name(s: &str) -> bool {
    s == "top_module"
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub id: String,
    pub title: String,
    pub spec_markdown: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waveform: Option<WaveformTable>,
    pub ports: Vec<PortDecl>,
    pub golden: FsmModel,
    #[serde(default)]
    pub tags: BTreeSet<Tag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depends_on: Option<String>,
    #[serde(default = "default_module_name", skip_serializing_if = "is_default_module_name")]
    pub module_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub onehot_state: Option<OneHotCheck>,
    #[serde(default, skip_serializing_if = "EquivOverrides::is_empty")]
    pub equiv: EquivOverrides,
}

impl ProblemSpec {
    pub fn clock_port(&self) -> Option<&PortDecl> {
        self.ports.iter().find(|p| p.kind == PortKind::Clock)
    }

    pub fn reset_port(&self) -> Option<&PortDecl> {
        self.ports.iter().find(|p| p.kind == PortKind::Reset)
    }

    pub fn data_inputs(&self) -> impl Iterator<Item = &PortDecl> {
        self.ports
            .iter()
            .filter(|p| p.kind == PortKind::Data && p.direction == PortDirection::Input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &PortDecl> {
        self.ports.iter().filter(|p| p.direction == PortDirection::Output)
    }

    /// Checks every cross-field invariant; the error names the violated rule.
    pub fn check(&self) -> Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("id must be non-empty".into());
        }
        let mut names = BTreeSet::new();
        for p in &self.ports {
            if p.width == 0 || p.width > crate::logic::MAX_WIDTH {
                return Err(format!("port '{}' width must be between 1 and 64", p.name));
            }
            if !names.insert(p.name.as_str()) {
                return Err(format!("duplicate port '{}'", p.name));
            }
        }
        for kind in [PortKind::Clock, PortKind::Reset] {
            let ports: Vec<&PortDecl> = self.ports.iter().filter(|p| p.kind == kind).collect();
            if ports.len() > 1 {
                return Err(format!("more than one {kind:?} port"));
            }
            if let Some(p) = ports.first() {
                if p.direction != PortDirection::Input || p.width != 1 {
                    return Err(format!("{kind:?} port '{}' must be a 1-bit input", p.name));
                }
            }
        }
        if let Some(w) = &self.waveform {
            w.check()?;
            for r in &w.rows {
                if !names.contains(r.signal.as_str()) {
                    return Err(format!("waveform signal not declared: '{}'", r.signal));
                }
            }
        }
        let decls = |dir: PortDirection| -> Vec<(String, u32, i64)> {
            self.ports
                .iter()
                .filter(|p| p.kind == PortKind::Data && p.direction == dir)
                .map(|p| (p.name.clone(), p.width, p.lsb))
                .collect()
        };
        let golden_in: Vec<(String, u32, i64)> =
            self.golden.inputs.iter().map(|s| (s.name.clone(), s.width, s.lsb)).collect();
        let golden_out: Vec<(String, u32, i64)> =
            self.golden.outputs.iter().map(|s| (s.name.clone(), s.width, s.lsb)).collect();
        let sorted = |mut v: Vec<(String, u32, i64)>| {
            v.sort();
            v
        };
        if sorted(golden_in) != sorted(decls(PortDirection::Input)) {
            return Err("golden inputs must equal the non-clock, non-reset input ports".into());
        }
        if sorted(golden_out) != sorted(decls(PortDirection::Output)) {
            return Err("golden outputs must equal the output ports".into());
        }
        let reset_port = self.reset_port().map(|p| p.name.clone());
        if self.golden.reset_signal != reset_port {
            return Err("golden reset_signal must name the reset port".into());
        }
        let clock_port = self.clock_port().map(|p| p.name.clone());
        if self.golden.clock != clock_port {
            return Err("golden clock must name the clock port".into());
        }
        if self.tags.contains(&Tag::SyncReset) && self.golden.reset_kind != ResetKind::Synchronous {
            return Err("sync-reset tag requires a synchronous golden reset".into());
        }
        if self.tags.contains(&Tag::AsyncReset) && self.golden.reset_kind != ResetKind::Asynchronous {
            return Err("async-reset tag requires an asynchronous golden reset".into());
        }
        if (self.golden.reset_kind == ResetKind::None) != reset_port.is_none() {
            return Err("golden reset_kind must be None exactly when there is no reset port".into());
        }
        if let Some(oh) = &self.onehot_state {
            match self.ports.iter().find(|p| p.name == oh.signal) {
                Some(p) if p.width == oh.states => {}
                Some(_) => return Err(format!("one-hot signal '{}' must be {} bits wide", oh.signal, oh.states)),
                None => return Err(format!("one-hot signal '{}' is not a port", oh.signal)),
            }
        }
        self.golden.validate().map_err(|e| format!("golden model: {e}"))
    }
}

/// On-disk problem document.
#[derive(Serialize, Deserialize)]
struct ProblemFile {
    schema: u32,
    #[serde(flatten)]
    spec: ProblemSpec,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: schema error: {field}")]
    Schema { path: PathBuf, field: String },
    #[error("{path}: consistency error: {rule}")]
    Consistency { path: PathBuf, rule: String },
    #[error("unknown problem '{0}'")]
    UnknownProblem(String),
}

/// Parses a problem document; `path` is used only for error messages.
pub fn parse_problem(text: &str, path: &Path) -> Result<ProblemSpec, CorpusError> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| classify_json_error(e, path))?;
    if file.schema != SCHEMA_VERSION {
        return Err(CorpusError::Schema {
            path: path.into(),
            field: format!("schema (expected {SCHEMA_VERSION}, found {})", file.schema),
        });
    }
    let spec = file.spec;
    if spec.ports.is_empty() {
        return Err(CorpusError::Schema {
            path: path.into(),
            field: "ports".into(),
        });
    }
    spec.check().map_err(|rule| CorpusError::Consistency {
        path: path.into(),
        rule,
    })?;
    Ok(spec)
}

fn classify_json_error(e: serde_json::Error, path: &Path) -> CorpusError {
    use serde_json::error::Category;
    let msg = e.to_string();
    match e.classify() {
        Category::Data => {
            let field = msg
                .strip_prefix("missing field `")
                .and_then(|rest| rest.split('`').next())
                .map(str::to_string)
                .unwrap_or_else(|| msg.split(" at line").next().unwrap_or(&msg).to_string());
            CorpusError::Schema {
                path: path.into(),
                field,
            }
        }
        _ => CorpusError::Parse {
            path: path.into(),
            line: e.line(),
            column: e.column(),
            message: msg.split(" at line").next().unwrap_or(&msg).to_string(),
        },
    }
}

pub fn load_problem(path: &Path) -> Result<ProblemSpec, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.into(),
        source,
    })?;
    parse_problem(&text, path)
}

pub fn problem_to_json(spec: &ProblemSpec) -> String {
    let file = ProblemFile {
        schema: SCHEMA_VERSION,
        spec: spec.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("problem serializes");
    s.push('\n');
    s
}

pub fn save_problem(spec: &ProblemSpec, path: &Path) -> Result<(), CorpusError> {
    std::fs::write(path, problem_to_json(spec)).map_err(|source| CorpusError::Io {
        path: path.into(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IssueKind {
    DuplicateId(String),
    UnresolvedDependency { depends_on: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CorpusIssue {
    pub spec: String,
    pub kind: IssueKind,
}

/// Cross-problem checks. The result is sorted, so it does not depend on the
/// input order.
pub fn validate_corpus(specs: &[ProblemSpec]) -> Vec<CorpusIssue> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in specs {
        *counts.entry(s.id.as_str()).or_default() += 1;
    }
    let mut issues = Vec::new();
    for (id, n) in &counts {
        if *n > 1 {
            issues.push(CorpusIssue {
                spec: id.to_string(),
                kind: IssueKind::DuplicateId(id.to_string()),
            });
        }
    }
    for s in specs {
        if let Some(dep) = &s.depends_on {
            if !counts.contains_key(dep.as_str()) {
                issues.push(CorpusIssue {
                    spec: s.id.clone(),
                    kind: IssueKind::UnresolvedDependency {
                        depends_on: dep.clone(),
                    },
                });
            }
        }
    }
    issues.sort();
    issues
}

/// A loaded, validated set of problems.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    problems: Vec<ProblemSpec>,
}

impl Corpus {
    pub fn new(problems: Vec<ProblemSpec>) -> Result<Self, Vec<CorpusIssue>> {
        let issues = validate_corpus(&problems);
        if issues.is_empty() {
            Ok(Corpus { problems })
        } else {
            Err(issues)
        }
    }

    /// Loads every `*.problem.json` file in `dir`, in file-name order.
    pub fn load_dir(dir: &Path) -> Result<Self, CorpusError> {
        let entries = std::fs::read_dir(dir).map_err(|source| CorpusError::Io {
            path: dir.into(),
            source,
        })?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.to_string_lossy().ends_with(PROBLEM_EXTENSION))
            .collect();
        paths.sort();
        let problems = paths.iter().map(|p| load_problem(p)).collect::<Result<Vec<_>, _>>()?;
        Corpus::new(problems).map_err(|issues| CorpusError::Consistency {
            path: dir.into(),
            rule: issues
                .iter()
                .map(|i| format!("{}: {:?}", i.spec, i.kind))
                .collect::<Vec<_>>()
                .join("; "),
        })
    }

    pub fn problems(&self) -> &[ProblemSpec] {
        &self.problems
    }

    pub fn get(&self, id: &str) -> Result<&ProblemSpec, CorpusError> {
        self.problems
            .iter()
            .find(|p| p.id == id)
            .ok_or_else(|| CorpusError::UnknownProblem(id.to_string()))
    }

    /// The predecessor problem whose transition table is injected as context.
    pub fn predecessor(&self, p: &ProblemSpec) -> Option<&ProblemSpec> {
        p.depends_on.as_deref().and_then(|d| self.get(d).ok())
    }
}

/// One step of a stimulus script.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StimulusStep {
    SetInputs(BTreeMap<String, u64>),
    /// One rising clock edge followed by settling.
    Tick,
    /// Drives the reset input to the given level without a clock edge.
    HoldReset(bool),
    Settle,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StimulusScript {
    pub steps: Vec<StimulusStep>,
}

impl StimulusScript {
    /// Checks that every driven name is a data or reset input and that values
    /// fit their widths.
    pub fn check(&self, p: &ProblemSpec) -> Result<(), String> {
        for step in &self.steps {
            if let StimulusStep::SetInputs(values) = step {
                for (name, v) in values {
                    let port = p
                        .ports
                        .iter()
                        .find(|q| &q.name == name && q.direction == PortDirection::Input && q.kind != PortKind::Clock)
                        .ok_or_else(|| format!("'{name}' is not a declared input"))?;
                    if port.width < 64 && *v >> port.width != 0 {
                        return Err(format!("value {v} does not fit the {}-bit input '{name}'", port.width));
                    }
                }
            }
        }
        Ok(())
    }

    /// Script replaying a waveform after a reset: for each cycle the row
    /// values are applied, observed with `Settle`, then clocked.
    pub fn from_waveform(p: &ProblemSpec, w: &WaveformTable) -> StimulusScript {
        let mut steps = Vec::new();
        let inputs: Vec<&PortDecl> = p
            .ports
            .iter()
            .filter(|q| q.direction == PortDirection::Input && q.kind != PortKind::Clock)
            .collect();
        let mut zeros: BTreeMap<String, u64> = inputs.iter().map(|q| (q.name.clone(), 0)).collect();
        if let Some(r) = p.reset_port() {
            let mut with_reset = zeros.clone();
            with_reset.insert(r.name.clone(), u64::from(p.golden.reset_active_high));
            zeros.insert(r.name.clone(), u64::from(!p.golden.reset_active_high));
            steps.push(StimulusStep::SetInputs(with_reset));
            steps.push(StimulusStep::Settle);
            if p.clock_port().is_some() {
                steps.push(StimulusStep::Tick);
            }
        }
        for (i, _) in w.cycles.iter().enumerate() {
            let mut values = zeros.clone();
            for row in &w.rows {
                if values.contains_key(&row.signal) {
                    values.insert(row.signal.clone(), u64::from(row.values[i]));
                }
            }
            steps.push(StimulusStep::SetInputs(values));
            steps.push(StimulusStep::Settle);
            if p.clock_port().is_some() {
                steps.push(StimulusStep::Tick);
            }
        }
        StimulusScript { steps }
    }
}
