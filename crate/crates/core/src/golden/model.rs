//! Golden FSM description and its compiled, executable form.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elab::ir::{eval, Env, IrExpr, Var};
use crate::elab::lower_expression;
use crate::logic::{BitVal, LogicVec, MAX_WIDTH};
use crate::sv::parse_expression;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResetKind {
    Synchronous,
    Asynchronous,
    /// Purely combinational problems without a reset input.
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalDecl {
    pub name: String,
    pub width: u32,
    /// Index of the least significant bit, as in `[3:1]`.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub lsb: i64,
}

fn is_zero(v: &i64) -> bool {
    *v == 0
}

/// Data register carried alongside the control state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterDecl {
    pub name: String,
    pub width: u32,
    #[serde(default)]
    pub reset: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub guard: String,
    pub next: String,
    /// Register name to new-value expression.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub updates: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MealyRule {
    pub state: String,
    pub guard: String,
    pub outputs: BTreeMap<String, String>,
}

fn default_true() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

/// Reference machine. Guards and output values are expressions in the
/// SystemVerilog subset over inputs and registers; output bits written as
/// `x` are don't-cares.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsmModel {
    pub states: Vec<String>,
    pub reset_state: String,
    pub reset_kind: ResetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clock: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reset_signal: Option<String>,
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub reset_active_high: bool,
    pub inputs: Vec<SignalDecl>,
    pub outputs: Vec<SignalDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub registers: Vec<RegisterDecl>,
    /// Priority-ordered rules per state; the last guard must be constant true.
    pub transitions: BTreeMap<String, Vec<Transition>>,
    pub moore_outputs: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mealy_rules: Vec<MealyRule>,
}

impl FsmModel {
    pub fn validate(&self) -> Result<(), String> {
        CompiledFsm::compile(self).map(|_| ()).map_err(|e| e.to_string())
    }

    pub fn compile(&self) -> Result<CompiledFsm, GoldenError> {
        CompiledFsm::compile(self)
    }

    /// Total number of input bits, excluding clock and reset.
    pub fn input_bits(&self) -> u32 {
        self.inputs.iter().map(|s| s.width).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GoldenError {
    #[error("invalid golden model: {0}")]
    Invalid(String),
    #[error("no transition rule matched in state {state} for inputs {inputs}")]
    NoRuleMatched { state: String, inputs: String },
}

#[derive(Debug, Clone)]
struct CTransition {
    guard: IrExpr,
    next: usize,
    updates: Vec<(usize, IrExpr)>,
}

#[derive(Debug, Clone)]
struct CMealy {
    state: usize,
    guard: IrExpr,
    outputs: Vec<(usize, IrExpr)>,
}

/// Control state plus register values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GoldenState {
    pub state: usize,
    pub regs: Vec<LogicVec>,
}

#[derive(Debug, Clone)]
pub struct CompiledFsm {
    model: FsmModel,
    transitions: Vec<Vec<CTransition>>,
    moore: Vec<Vec<IrExpr>>,
    mealy: Vec<CMealy>,
    reset_state: usize,
}

struct GEnv<'a> {
    inputs: &'a [LogicVec],
    regs: &'a [LogicVec],
}

impl Env for GEnv<'_> {
    fn read(&self, v: Var) -> LogicVec {
        match v {
            Var::Sig(i) if i < self.inputs.len() => self.inputs[i],
            Var::Sig(i) => self.regs[i - self.inputs.len()],
            Var::Local(_) => unreachable!("golden expressions have no locals"),
        }
    }
}

fn invalid(msg: impl Into<String>) -> GoldenError {
    GoldenError::Invalid(msg.into())
}

impl CompiledFsm {
    pub fn compile(m: &FsmModel) -> Result<Self, GoldenError> {
        let mut seen = BTreeSet::new();
        for s in &m.states {
            if !seen.insert(s.as_str()) {
                return Err(invalid(format!("duplicate state '{s}'")));
            }
        }
        if m.states.is_empty() {
            return Err(invalid("no states"));
        }
        let state_index = |name: &str| m.states.iter().position(|s| s == name);
        let reset_state =
            state_index(&m.reset_state).ok_or_else(|| invalid(format!("reset state '{}' is not a state", m.reset_state)))?;

        let mut names = BTreeSet::new();
        let mut symbols: Vec<(String, u32, i64)> = Vec::new();
        for s in m.inputs.iter().chain(&m.outputs) {
            if s.width == 0 || s.width > MAX_WIDTH {
                return Err(invalid(format!("'{}' width must be between 1 and 64", s.name)));
            }
            if !names.insert(s.name.as_str()) {
                return Err(invalid(format!("duplicate signal '{}'", s.name)));
            }
        }
        for r in &m.registers {
            if r.width == 0 || r.width > MAX_WIDTH {
                return Err(invalid(format!("register '{}' width must be between 1 and 64", r.name)));
            }
            if !names.insert(r.name.as_str()) {
                return Err(invalid(format!("duplicate signal '{}'", r.name)));
            }
            if r.width < 64 && r.reset >> r.width != 0 {
                return Err(invalid(format!("reset value of '{}' does not fit", r.name)));
            }
        }
        symbols.extend(m.inputs.iter().map(|s| (s.name.clone(), s.width, s.lsb)));
        symbols.extend(m.registers.iter().map(|r| (r.name.clone(), r.width, 0)));
        let reg_symbols: Vec<(String, u32, i64)> = m
            .inputs
            .iter()
            .map(|s| (format!("\u{0}{}", s.name), s.width, s.lsb))
            .chain(m.registers.iter().map(|r| (r.name.clone(), r.width, 0)))
            .collect();

        let lower = |text: &str, width: u32, syms: &[(String, u32, i64)], what: &str| -> Result<IrExpr, GoldenError> {
            let e = parse_expression(text).map_err(|ds| {
                invalid(format!(
                    "{what} '{text}': {}",
                    ds.first().map(|d| d.message.clone()).unwrap_or_default()
                ))
            })?;
            let ir = lower_expression(&e, syms, width).map_err(|ds| {
                invalid(format!(
                    "{what} '{text}': {}",
                    ds.first().map(|d| d.message.clone()).unwrap_or_default()
                ))
            })?;
            Ok(if width > 0 { ir.resized(width) } else { ir })
        };

        for key in m.transitions.keys().chain(m.moore_outputs.keys()) {
            if state_index(key).is_none() {
                return Err(invalid(format!("'{key}' is not a state")));
            }
        }

        let mut transitions = Vec::new();
        let mut moore = Vec::new();
        for s in &m.states {
            let rules = m
                .transitions
                .get(s)
                .filter(|r| !r.is_empty())
                .ok_or_else(|| invalid(format!("state '{s}' has no transitions")))?;
            let mut compiled = Vec::new();
            for t in rules {
                let guard = lower(&t.guard, 0, &symbols, "guard")?;
                let next = state_index(&t.next).ok_or_else(|| invalid(format!("'{}' is not a state", t.next)))?;
                let mut updates = Vec::new();
                for (reg, value) in &t.updates {
                    let ri = m
                        .registers
                        .iter()
                        .position(|r| &r.name == reg)
                        .ok_or_else(|| invalid(format!("update of unknown register '{reg}'")))?;
                    updates.push((ri, lower(value, m.registers[ri].width, &symbols, "update")?));
                }
                compiled.push(CTransition { guard, next, updates });
            }
            let last = &compiled.last().unwrap().guard;
            if last.try_const().map(|v| v.truth()) != Some(BitVal::One) {
                return Err(invalid(format!("last transition rule of state '{s}' must have guard 1")));
            }
            transitions.push(compiled);

            let outs = m
                .moore_outputs
                .get(s)
                .ok_or_else(|| invalid(format!("state '{s}' has no output assignment")))?;
            for name in outs.keys() {
                if !m.outputs.iter().any(|o| &o.name == name) {
                    return Err(invalid(format!("'{name}' is not an output")));
                }
            }
            let mut row = Vec::new();
            for o in &m.outputs {
                let text = outs
                    .get(&o.name)
                    .ok_or_else(|| invalid(format!("state '{s}' does not assign output '{}'", o.name)))?;
                // Inputs are hidden so that Moore outputs cannot depend on them.
                row.push(lower(text, o.width, &reg_symbols, "Moore output")?);
            }
            moore.push(row);
        }

        let mut mealy = Vec::new();
        for r in &m.mealy_rules {
            let state = state_index(&r.state).ok_or_else(|| invalid(format!("'{}' is not a state", r.state)))?;
            let guard = lower(&r.guard, 0, &symbols, "guard")?;
            let mut outputs = Vec::new();
            for (name, value) in &r.outputs {
                let oi = m
                    .outputs
                    .iter()
                    .position(|o| &o.name == name)
                    .ok_or_else(|| invalid(format!("'{name}' is not an output")))?;
                outputs.push((oi, lower(value, m.outputs[oi].width, &symbols, "Mealy output")?));
            }
            mealy.push(CMealy { state, guard, outputs });
        }

        Ok(CompiledFsm {
            model: m.clone(),
            transitions,
            moore,
            mealy,
            reset_state,
        })
    }

    pub fn model(&self) -> &FsmModel {
        &self.model
    }

    pub fn state_name(&self, i: usize) -> &str {
        &self.model.states[i]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.model.states.iter().position(|s| s == name)
    }

    pub fn reset_state(&self) -> GoldenState {
        GoldenState {
            state: self.reset_state,
            regs: self
                .model
                .registers
                .iter()
                .map(|r| LogicVec::from_u64(r.width, r.reset))
                .collect(),
        }
    }

    pub fn input_widths(&self) -> Vec<u32> {
        self.model.inputs.iter().map(|s| s.width).collect()
    }

    /// Output values in `model.outputs` order; unknown bits are don't-cares.
    pub fn outputs(&self, s: &GoldenState, inputs: &[LogicVec]) -> Vec<LogicVec> {
        let env = GEnv {
            inputs,
            regs: &s.regs,
        };
        let mut out: Vec<LogicVec> = self.moore[s.state].iter().map(|e| eval(e, &env)).collect();
        for rule in self.mealy.iter().filter(|r| r.state == s.state) {
            if eval(&rule.guard, &env).truth() == BitVal::One {
                for (oi, e) in &rule.outputs {
                    out[*oi] = eval(e, &env);
                }
                break;
            }
        }
        out
    }

    /// The state after one clock edge without reset.
    pub fn next(&self, s: &GoldenState, inputs: &[LogicVec]) -> Result<GoldenState, GoldenError> {
        let env = GEnv {
            inputs,
            regs: &s.regs,
        };
        for t in &self.transitions[s.state] {
            if eval(&t.guard, &env).truth() == BitVal::One {
                let mut regs = s.regs.clone();
                for (ri, e) in &t.updates {
                    regs[*ri] = eval(e, &env);
                }
                return Ok(GoldenState { state: t.next, regs });
            }
        }
        Err(GoldenError::NoRuleMatched {
            state: self.state_name(s.state).to_string(),
            inputs: inputs.iter().map(|v| v.to_bin_string()).collect::<Vec<_>>().join(","),
        })
    }

    /// Index of the first transition rule that fires, for totality checks.
    pub fn firing_rule(&self, s: &GoldenState, inputs: &[LogicVec]) -> Option<usize> {
        let env = GEnv {
            inputs,
            regs: &s.regs,
        };
        self.transitions[s.state]
            .iter()
            .position(|t| eval(&t.guard, &env).truth() == BitVal::One)
    }

    /// Converts named input values into `model.inputs` order; missing names are 0.
    pub fn input_vector(&self, values: &BTreeMap<String, u64>) -> Vec<LogicVec> {
        self.model
            .inputs
            .iter()
            .map(|s| LogicVec::from_u64(s.width, values.get(&s.name).copied().unwrap_or(0)))
            .collect()
    }
}

/// One golden step from named inputs: next state and named outputs.
pub fn golden_step(
    m: &CompiledFsm,
    state: &GoldenState,
    inputs: &BTreeMap<String, u64>,
) -> Result<(GoldenState, BTreeMap<String, LogicVec>), GoldenError> {
    let iv = m.input_vector(inputs);
    let outs = m.outputs(state, &iv);
    let next = m.next(state, &iv)?;
    let named = m
        .model()
        .outputs
        .iter()
        .zip(outs)
        .map(|(o, v)| (o.name.clone(), v))
        .collect();
    Ok((next, named))
}
