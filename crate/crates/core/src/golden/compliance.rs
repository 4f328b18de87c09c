//! Dynamic reset-style check: assert reset without a clock edge and see
//! whether the design's registers react.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::equiv::{EquivError, Harness, Product, StepOutcome};
use super::model::{CompiledFsm, FsmModel, GoldenState, ResetKind};
use crate::elab::{classify_reset, Design, ResetStyle, Storage};
use crate::logic::LogicVec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResetViolation {
    /// Registers changed on reset assertion although the reset is synchronous.
    AsyncWhereSyncRequired,
    /// Registers ignored reset assertion although the reset is asynchronous.
    SyncWhereAsyncRequired,
    /// Every register is still unknown after the reset sequence.
    NoResetBehavior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Compliance {
    Ok,
    /// The problem has no reset input.
    NotApplicable,
    Violation(ResetViolation),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub outcome: Compliance,
    /// Structural classification, reported for information only.
    pub structural: Option<ResetStyle>,
    pub detail: String,
}

/// Shortest input sequence, reset deasserted, that leads the golden model
/// out of its reset state.
fn divergence_path(m: &CompiledFsm) -> Option<Vec<BTreeMap<String, u64>>> {
    let model = m.model();
    let widths = m.input_widths();
    let total: u32 = widths.iter().sum();
    if total > 12 {
        return None;
    }
    let decode = |mut idx: u64| -> BTreeMap<String, u64> {
        let mut out = BTreeMap::new();
        for s in &model.inputs {
            out.insert(s.name.clone(), idx & ((1u64 << s.width) - 1));
            idx >>= s.width;
        }
        if let Some(r) = &model.reset_signal {
            out.insert(r.clone(), u64::from(!model.reset_active_high));
        }
        out
    };
    let start = m.reset_state();
    let mut seen: HashSet<GoldenState> = HashSet::from([start.clone()]);
    let mut queue: VecDeque<(GoldenState, Vec<u64>)> = VecDeque::from([(start.clone(), Vec::new())]);
    while let Some((g, path)) = queue.pop_front() {
        for v in 0..(1u64 << total) {
            let values = decode(v);
            let next = m.next(&g, &m.input_vector(&values)).ok()?;
            let mut p = path.clone();
            p.push(v);
            if next != start {
                return Some(p.into_iter().map(decode).collect());
            }
            if seen.insert(next.clone()) {
                queue.push_back((next, p));
            }
        }
    }
    None
}

fn known_bits_agree(a: &[LogicVec], reference: &[LogicVec]) -> bool {
    a.iter().zip(reference).all(|(x, r)| x.refines(r))
}

/// The edge-driven registers out of a state key; latches and feedback
/// signals follow the registers and are left out.
fn registers(d: &Design, key: &[LogicVec]) -> Vec<LogicVec> {
    d.state_signals()
        .into_iter()
        .zip(key)
        .filter(|(i, _)| d.signals[*i].storage == Storage::Register)
        .map(|(_, v)| *v)
        .collect()
}

/// Runs the reset test. The problem must have passed the interface check.
pub fn reset_compliance(d: &Design, m: &FsmModel) -> Result<ComplianceReport, EquivError> {
    let Some(reset_name) = m.reset_signal.clone() else {
        return Ok(ComplianceReport {
            outcome: Compliance::NotApplicable,
            structural: None,
            detail: "the problem has no reset input".into(),
        });
    };
    let structural = Some(classify_reset(d, &reset_name));
    let report = |outcome, detail: String| ComplianceReport {
        outcome,
        structural,
        detail,
    };
    if m.reset_kind == ResetKind::None {
        return Ok(report(Compliance::NotApplicable, "the problem has no reset behavior".into()));
    }
    let cm = m.compile()?;
    let h = Harness::new(d, &cm, &BTreeMap::new())?;
    let mut sim = h.simulator();
    let start = h.initial(&mut sim)?;
    let r0 = registers(d, &start.key);
    if r0.iter().all(|v| v.is_all_x()) {
        return Ok(report(
            Compliance::Violation(ResetViolation::NoResetBehavior),
            "every register is still unknown after the reset sequence".into(),
        ));
    }
    let Some(path) = divergence_path(&cm) else {
        return Ok(report(Compliance::Ok, "the golden model never leaves its reset state".into()));
    };
    let mut cur: Product = start;
    for values in &path {
        match h.step(&mut sim, &cur, values, false)? {
            StepOutcome::Next(p) => cur = p,
            // Functional differences are judged by the equivalence check.
            StepOutcome::Mismatch { .. } => {
                sim.tick()?;
                cur = Product {
                    g: cur.g,
                    key: sim.state_key(),
                    prev_edge: cur.prev_edge,
                };
            }
        }
    }
    let d1 = registers(d, &cur.key);
    sim.set_input(&reset_name, u64::from(m.reset_active_high))?;
    sim.settle()?;
    let d2 = registers(d, &sim.state_key());
    let outcome = match m.reset_kind {
        ResetKind::Synchronous if d2 != d1 => Some((
            ResetViolation::AsyncWhereSyncRequired,
            "registers changed when reset was asserted without a clock edge",
        )),
        ResetKind::Asynchronous if !known_bits_agree(&d2, &r0) => Some((
            ResetViolation::SyncWhereAsyncRequired,
            "registers did not return to their reset values when reset was asserted without a clock edge",
        )),
        _ => None,
    };
    Ok(match outcome {
        Some((v, text)) => report(Compliance::Violation(v), text.into()),
        None => report(Compliance::Ok, "reset behavior matches the required style".into()),
    })
}
