//! Cycle-based three-valued simulation of elaborated designs.
//!
//! All signals start unknown except the clock, which idles low. `settle`
//! evaluates combinational processes to a fixpoint and fires edge-triggered
//! processes on the edges it observes, so an asynchronous reset takes effect
//! as soon as its input changes. `tick` raises and lowers the clock.

pub mod vcd;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{StimulusScript, StimulusStep};
use crate::elab::ir::{eval, Env, IrStmt, LValue, LvSel};
use crate::elab::{Design, ProcClass, SigId, SignalKind, Var};
use crate::logic::{BitVal, LogicVec};
use crate::sv::ast::Edge;

pub use vcd::to_vcd;

/// Maximum number of combinational sweeps, and of edge-event rounds, per settle.
pub const SWEEP_CAP: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("combinational logic did not settle after {sweeps} sweeps (signals: {})", signals.join(", "))]
    CombLoop { sweeps: u32, signals: Vec<String> },
    #[error("contract violation: {0}")]
    ContractViolation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObsKind {
    Tick,
    Settle,
}

/// Observable values after settling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Index of the script step that produced this snapshot.
    pub step: usize,
    pub kind: ObsKind,
    pub cycle: u64,
    pub inputs: BTreeMap<String, LogicVec>,
    pub outputs: BTreeMap<String, LogicVec>,
    pub registers: BTreeMap<String, LogicVec>,
    /// Control state name, known for golden runs only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub snapshots: Vec<Snapshot>,
}

/// The reset input driven by `HoldReset`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResetPin {
    pub name: String,
    pub active_high: bool,
}

#[derive(Clone)]
struct Frame {
    vals: Vec<LogicVec>,
    /// Bits written by blocking assignments.
    bw: Vec<u64>,
    nba: Vec<LogicVec>,
    /// Bits written by nonblocking assignments.
    nw: Vec<u64>,
    locals: Vec<LogicVec>,
}

impl Env for Frame {
    fn read(&self, v: Var) -> LogicVec {
        match v {
            Var::Sig(i) => self.vals[i],
            Var::Local(i) => self.locals[i as usize],
        }
    }
}

impl Frame {
    fn merge(&mut self, other: Frame) {
        for i in 0..self.vals.len() {
            self.vals[i] = self.vals[i].merge(other.vals[i]);
            self.nba[i] = self.nba[i].merge(other.nba[i]);
            self.bw[i] |= other.bw[i];
            self.nw[i] |= other.nw[i];
        }
        for (a, b) in self.locals.iter_mut().zip(other.locals) {
            *a = a.merge(b);
        }
    }
}

/// Replaces the bits of `cur` selected by `m` with those of `new`.
fn apply(cur: LogicVec, new: LogicVec, m: u64) -> LogicVec {
    LogicVec::new(
        cur.width(),
        (cur.raw_bits() & !m) | (new.raw_bits() & m),
        (cur.xmask() & !m) | (new.xmask() & m),
    )
}

fn write(frame: &mut Frame, target: &LValue, value: LogicVec, nonblocking: bool) {
    let mut offset = 0;
    for part in target.parts.iter().rev() {
        let pv = value.slice(offset, part.width);
        offset += part.width;
        let start = match &part.sel {
            LvSel::Full => 0,
            LvSel::Const { lo } => i64::from(*lo),
            LvSel::Dyn { index, bias } => match eval(index, frame).to_u64() {
                Some(i) => i as i64 + bias,
                None => continue,
            },
        };
        let cur = match part.var {
            Var::Sig(i) if nonblocking => frame.nba[i],
            Var::Sig(i) => frame.vals[i],
            Var::Local(i) => frame.locals[i as usize],
        };
        let mut new = cur;
        let mut m = 0u64;
        for b in 0..part.width {
            let p = start + i64::from(b);
            if p >= 0 && p < i64::from(cur.width()) {
                new = new.with_bit(p as u32, pv.bit(b));
                m |= 1 << p;
            }
        }
        match part.var {
            Var::Sig(i) if nonblocking => {
                frame.nba[i] = new;
                frame.nw[i] |= m;
            }
            Var::Sig(i) => {
                frame.vals[i] = new;
                frame.bw[i] |= m;
            }
            Var::Local(i) => frame.locals[i as usize] = new,
        }
    }
}

fn exec(stmts: &[IrStmt], frame: &mut Frame) {
    for s in stmts {
        match s {
            IrStmt::Assign {
                target,
                value,
                nonblocking,
                ..
            } => {
                let v = eval(value, frame).resize(target.width);
                write(frame, target, v, *nonblocking);
            }
            IrStmt::If { cond, then, els } => match eval(cond, frame).truth() {
                BitVal::One => exec(then, frame),
                BitVal::Zero => exec(els, frame),
                BitVal::X => {
                    let mut other = frame.clone();
                    exec(then, frame);
                    exec(els, &mut other);
                    frame.merge(other);
                }
            },
            IrStmt::Case {
                selector,
                arms,
                default,
            } => {
                let sel = eval(selector, frame);
                let arm = if sel.has_x() {
                    None
                } else {
                    arms.iter()
                        .find(|a| a.labels.iter().any(|l| l.matches(sel, frame)))
                };
                match (arm, default) {
                    (Some(a), _) => exec(&a.body, frame),
                    (None, Some(d)) => exec(d, frame),
                    (None, None) => {}
                }
            }
        }
    }
}

fn is_posedge(old: BitVal, new: BitVal) -> bool {
    (old == BitVal::Zero && new != BitVal::Zero) || (old == BitVal::X && new == BitVal::One)
}

fn is_negedge(old: BitVal, new: BitVal) -> bool {
    (old == BitVal::One && new != BitVal::One) || (old == BitVal::X && new == BitVal::Zero)
}

/// Simulation state of one design.
#[derive(Debug, Clone)]
pub struct Simulator<'d> {
    d: &'d Design,
    values: Vec<LogicVec>,
    last_seen: Vec<LogicVec>,
    edge_signals: Vec<SigId>,
    state_signals: Vec<SigId>,
    cycle: u64,
    settled: bool,
    reset: Option<(SigId, bool)>,
    topological: bool,
}

impl<'d> Simulator<'d> {
    pub fn new(d: &'d Design) -> Self {
        let mut values: Vec<LogicVec> = d.signals.iter().map(|s| LogicVec::all_x(s.width)).collect();
        if let Some(c) = d.clock {
            values[c] = LogicVec::zero(d.signals[c].width);
        }
        // Feedback loops start from a known guess so that oscillation shows.
        for &p in &d.comb_cyclic {
            for &s in d.processes[p].drives.keys() {
                values[s] = LogicVec::zero(d.signals[s].width);
            }
        }
        Simulator {
            d,
            last_seen: values.clone(),
            values,
            edge_signals: d.edge_signals(),
            state_signals: d.state_signals(),
            cycle: 0,
            settled: false,
            reset: None,
            topological: true,
        }
    }

    /// Names the input that `HoldReset` drives.
    pub fn with_reset(mut self, pin: Option<&ResetPin>) -> Result<Self, SimError> {
        self.reset = match pin {
            None => None,
            Some(p) => Some((self.input_id(&p.name)?, p.active_high)),
        };
        Ok(self)
    }

    /// Evaluates combinational processes by sweeping only, ignoring the
    /// dependency order.
    pub fn sweep_only(mut self) -> Self {
        self.topological = false;
        self
    }

    pub fn design(&self) -> &'d Design {
        self.d
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn is_settled(&self) -> bool {
        self.settled
    }

    fn input_id(&self, name: &str) -> Result<SigId, SimError> {
        match self.d.signal(name) {
            Some(i) if self.d.signals[i].kind == SignalKind::Input && Some(i) != self.d.clock => Ok(i),
            Some(_) => Err(SimError::ContractViolation(format!("'{name}' is not a settable input"))),
            None => Err(SimError::ContractViolation(format!("unknown signal '{name}'"))),
        }
    }

    pub fn set_input(&mut self, name: &str, value: u64) -> Result<(), SimError> {
        let i = self.input_id(name)?;
        self.set_input_vec(i, LogicVec::from_u64(self.d.signals[i].width, value));
        Ok(())
    }

    pub fn set_input_vec(&mut self, id: SigId, value: LogicVec) {
        self.values[id] = value.resize(self.d.signals[id].width);
        self.settled = false;
    }

    /// Drives the reset input to its active (or inactive) level without a clock edge.
    pub fn hold_reset(&mut self, active: bool) -> Result<(), SimError> {
        let (r, high) = self
            .reset
            .ok_or_else(|| SimError::ContractViolation("the design has no reset input".into()))?;
        self.set_input_vec(r, LogicVec::from_bool(active == high));
        Ok(())
    }

    pub fn get(&self, id: SigId) -> Result<LogicVec, SimError> {
        if !self.settled {
            return Err(SimError::ContractViolation(format!(
                "'{}' read before the design settled",
                self.d.signals[id].name
            )));
        }
        Ok(self.values[id])
    }

    pub fn value(&self, name: &str) -> Result<LogicVec, SimError> {
        let i = self
            .d
            .signal(name)
            .ok_or_else(|| SimError::ContractViolation(format!("unknown signal '{name}'")))?;
        self.get(i)
    }

    /// Values of all state-holding signals, identifying the design's state.
    pub fn state_key(&self) -> Vec<LogicVec> {
        self.state_signals.iter().map(|&i| self.values[i]).collect()
    }

    /// Restores state-holding signals from [`Simulator::state_key`]; every
    /// other non-input signal becomes unknown until the next settle. The
    /// current input values become the edge-detection baseline.
    pub fn restore(&mut self, key: &[LogicVec]) {
        for (i, s) in self.d.signals.iter().enumerate() {
            if s.kind != SignalKind::Input {
                self.values[i] = LogicVec::all_x(s.width);
            }
        }
        for (&i, v) in self.state_signals.iter().zip(key) {
            self.values[i] = *v;
        }
        self.last_seen.clone_from(&self.values);
        self.settled = false;
    }

    fn frame(&self, p: usize) -> Frame {
        let n = self.values.len();
        Frame {
            vals: self.values.clone(),
            bw: vec![0; n],
            nba: self.values.clone(),
            nw: vec![0; n],
            locals: self.d.processes[p]
                .locals
                .iter()
                .map(|l| LogicVec::all_x(l.width))
                .collect(),
        }
    }

    fn commit(values: &mut [LogicVec], f: &Frame) -> bool {
        let mut changed = false;
        #[allow(clippy::needless_range_loop)]
        for i in 0..values.len() {
            if f.bw[i] == 0 && f.nw[i] == 0 {
                continue;
            }
            let v = apply(apply(values[i], f.vals[i], f.bw[i]), f.nba[i], f.nw[i]);
            if v != values[i] {
                values[i] = v;
                changed = true;
            }
        }
        changed
    }

    fn eval_comb(&mut self, p: usize) -> bool {
        let mut f = self.frame(p);
        exec(&self.d.processes[p].body, &mut f);
        Self::commit(&mut self.values, &f)
    }

    fn settle_comb(&mut self) -> Result<(), SimError> {
        let order = &self.d.comb_order;
        if self.topological {
            for &p in order {
                self.eval_comb(p);
            }
        }
        for _ in 0..SWEEP_CAP {
            let mut changed = false;
            for &p in order {
                changed |= self.eval_comb(p);
            }
            if !changed {
                return Ok(());
            }
        }
        Err(self.comb_loop())
    }

    fn comb_loop(&self) -> SimError {
        let mut names: Vec<String> = Vec::new();
        for &p in &self.d.comb_cyclic {
            for &s in self.d.processes[p].drives.keys() {
                names.push(self.d.signals[s].name.clone());
            }
        }
        names.sort();
        names.dedup();
        SimError::CombLoop {
            sweeps: SWEEP_CAP,
            signals: names,
        }
    }

    fn triggered(&self) -> Vec<usize> {
        let mut fired = Vec::new();
        for (pi, p) in self.d.processes.iter().enumerate() {
            if p.class != ProcClass::Edge {
                continue;
            }
            let hit = p.sensitivity.iter().any(|s| {
                let (old, new) = (self.last_seen[s.signal].bit(0), self.values[s.signal].bit(0));
                match s.edge {
                    Edge::Pos => is_posedge(old, new),
                    Edge::Neg => is_negedge(old, new),
                    Edge::Level => false,
                }
            });
            if hit {
                fired.push(pi);
            }
        }
        fired
    }

    /// Evaluates combinational logic to a fixpoint and runs edge-triggered
    /// processes for every edge seen since the previous settle.
    pub fn settle(&mut self) -> Result<(), SimError> {
        for _ in 0..SWEEP_CAP {
            self.settle_comb()?;
            let fired = self.triggered();
            for &s in &self.edge_signals {
                self.last_seen[s] = self.values[s];
            }
            if fired.is_empty() {
                self.settled = true;
                return Ok(());
            }
            let frames: Vec<Frame> = fired
                .iter()
                .map(|&p| {
                    let mut f = self.frame(p);
                    exec(&self.d.processes[p].body, &mut f);
                    f
                })
                .collect();
            for f in &frames {
                let mut blocking = f.clone();
                blocking.nw.iter_mut().for_each(|m| *m = 0);
                Self::commit(&mut self.values, &blocking);
            }
            for f in &frames {
                let mut nba = f.clone();
                nba.bw.iter_mut().for_each(|m| *m = 0);
                Self::commit(&mut self.values, &nba);
            }
        }
        Err(self.comb_loop())
    }

    /// One clock cycle: rising edge, settle, falling edge, settle.
    pub fn tick(&mut self) -> Result<(), SimError> {
        if !self.settled {
            return Err(SimError::ContractViolation("tick before the design settled".into()));
        }
        match self.d.clock {
            Some(c) => {
                let w = self.d.signals[c].width;
                self.values[c] = LogicVec::from_u64(w, 1);
                self.settle()?;
                self.cycle += 1;
                self.values[c] = LogicVec::zero(w);
                self.settle()
            }
            None => {
                self.cycle += 1;
                self.settle()
            }
        }
    }

    pub fn snapshot(&self, step: usize, kind: ObsKind) -> Result<Snapshot, SimError> {
        let mut inputs = BTreeMap::new();
        let mut outputs = BTreeMap::new();
        for (i, s) in self.d.ports() {
            if s.kind == SignalKind::Input {
                if Some(i) != self.d.clock {
                    inputs.insert(s.name.clone(), self.get(i)?);
                }
            } else {
                outputs.insert(s.name.clone(), self.get(i)?);
            }
        }
        let mut registers = BTreeMap::new();
        for &i in &self.state_signals {
            registers.insert(self.d.signals[i].name.clone(), self.get(i)?);
        }
        Ok(Snapshot {
            step,
            kind,
            cycle: self.cycle,
            inputs,
            outputs,
            registers,
            state: None,
        })
    }
}

/// Executes a stimulus script, recording a snapshot after every `Tick` and
/// every `Settle`.
pub fn run(d: &Design, script: &StimulusScript, reset: Option<&ResetPin>) -> Result<Trace, SimError> {
    let mut sim = Simulator::new(d).with_reset(reset)?;
    let mut trace = Trace::default();
    for (i, step) in script.steps.iter().enumerate() {
        match step {
            StimulusStep::SetInputs(values) => {
                for (name, v) in values {
                    sim.set_input(name, *v)?;
                }
            }
            StimulusStep::HoldReset(active) => sim.hold_reset(*active)?,
            StimulusStep::Settle => {
                sim.settle()?;
                trace.snapshots.push(sim.snapshot(i, ObsKind::Settle)?);
            }
            StimulusStep::Tick => {
                if !sim.is_settled() {
                    sim.settle()?;
                }
                sim.tick()?;
                trace.snapshots.push(sim.snapshot(i, ObsKind::Tick)?);
            }
        }
    }
    Ok(trace)
}
