//! Judging one piece of code against a problem: compile, interface, reset
//! style, then behavior. The first failing stage decides the failure kind.

use serde::{Deserialize, Serialize};

use super::FailureKind;
use crate::corpus::ProblemSpec;
use crate::elab::{check_interface, elaborate, Design};
use crate::golden::{equiv_check, reset_compliance, Compliance, ComplianceReport, EquivConfig, EquivError, Verdict};
use crate::sim::SimError;
use crate::sv::{format_diagnostics, parse_source, DiagCode, Diagnostic};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grade {
    pub outcome: Result<(), FailureKind>,
    pub diagnostics: Vec<Diagnostic>,
    pub compliance: Option<ComplianceReport>,
    pub verdict: Option<Verdict>,
    pub detail: String,
}

impl Grade {
    pub fn passed(&self) -> bool {
        self.outcome.is_ok()
    }

    /// Human-readable account of every stage that ran.
    pub fn report(&self, code: &str) -> String {
        let mut out = String::new();
        if !self.diagnostics.is_empty() {
            out.push_str(&format_diagnostics(&self.diagnostics, code));
            if !out.ends_with('\n') {
                out.push('\n');
            }
        }
        if let Some(c) = &self.compliance {
            out.push_str(&format!("reset compliance: {:?} ({})\n", c.outcome, c.detail));
        }
        match &self.verdict {
            Some(Verdict::Equivalent) => out.push_str("equivalence: equivalent\n"),
            Some(Verdict::Counterexample(cx)) => out.push_str(&format!(
                "equivalence: counterexample after {} input vectors, output '{}' expected {} got {}\n",
                cx.inputs.len(),
                cx.output,
                cx.expected.get(&cx.output).map_or("?".into(), |v| v.to_string()),
                cx.actual.get(&cx.output).map_or("?".into(), |v| v.to_string()),
            )),
            Some(Verdict::Inconclusive(why)) => out.push_str(&format!("equivalence: inconclusive ({why})\n")),
            None => {}
        }
        if !self.detail.is_empty() {
            out.push_str(&format!("result: {}\n", self.detail));
        }
        out
    }
}

fn classify_compile(diags: &[Diagnostic]) -> FailureKind {
    let errors = || diags.iter().filter(|d| d.is_error());
    if errors().any(|d| d.code == DiagCode::Unsupported) {
        FailureKind::UnsupportedConstruct
    } else if errors().all(|d| d.code == DiagCode::MultiDriver) {
        FailureKind::MultiDriver
    } else {
        FailureKind::Syntax
    }
}

/// Parses, elaborates and interface-checks `code`. On failure returns the
/// failure kind and all diagnostics.
pub fn compile(p: &ProblemSpec, code: &str) -> Result<(Design, Vec<Diagnostic>), (FailureKind, Vec<Diagnostic>)> {
    let parsed = parse_source(code).map_err(|ds| (classify_compile(&ds), ds))?;
    let mut warnings = parsed.warnings;
    let d = elaborate(&parsed.module).map_err(|mut ds| {
        let kind = classify_compile(&ds);
        warnings.append(&mut ds);
        (kind, std::mem::take(&mut warnings))
    })?;
    if let Err(mut ds) = check_interface(&d, p) {
        warnings.append(&mut ds);
        return Err((FailureKind::InterfaceMismatch, warnings));
    }
    Ok((d, warnings))
}

fn sim_failure(e: &EquivError) -> FailureKind {
    match e {
        EquivError::Sim(SimError::CombLoop { .. }) => FailureKind::CombLoop,
        EquivError::Interface(_) => FailureKind::InterfaceMismatch,
        _ => FailureKind::FunctionalMismatch,
    }
}

/// Full judgement of `code`.
pub fn grade_code(p: &ProblemSpec, code: &str, cfg: &EquivConfig) -> Grade {
    let (d, diagnostics) = match compile(p, code) {
        Ok(x) => x,
        Err((kind, diagnostics)) => {
            return Grade {
                outcome: Err(kind),
                diagnostics,
                compliance: None,
                verdict: None,
                detail: format!("{kind} reported while compiling"),
            }
        }
    };
    let mut grade = Grade {
        outcome: Ok(()),
        diagnostics,
        compliance: None,
        verdict: None,
        detail: String::new(),
    };
    let compliance = reset_compliance(&d, &p.golden);
    // Behavior is checked even after a reset violation so that an
    // oscillating design is reported as a combinational loop.
    let verdict = equiv_check(&d, &p.golden, cfg);
    let mut failures: Vec<(FailureKind, String)> = Vec::new();
    match compliance {
        Ok(c) => {
            if let Compliance::Violation(v) = c.outcome {
                failures.push((FailureKind::ResetStyleViolation, format!("{v:?}: {}", c.detail)));
            }
            grade.compliance = Some(c);
        }
        Err(e) => failures.push((sim_failure(&e), e.to_string())),
    }
    match verdict {
        Ok(v) => {
            match &v {
                Verdict::Equivalent => {}
                Verdict::Counterexample(cx) => failures.push((
                    FailureKind::FunctionalMismatch,
                    format!("output '{}' differs after {} input vectors", cx.output, cx.inputs.len()),
                )),
                Verdict::Inconclusive(why) => {
                    failures.push((FailureKind::FunctionalMismatch, format!("equivalence not established: {why}")))
                }
            }
            grade.verdict = Some(v);
        }
        Err(e) => failures.push((sim_failure(&e), e.to_string())),
    }
    if let Some((kind, detail)) = failures.into_iter().min_by_key(|(k, _)| *k) {
        grade.outcome = Err(kind);
        grade.detail = detail;
    } else {
        grade.detail = "pass".into();
    }
    grade
}
