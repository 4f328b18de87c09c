//! Executes stimulus scripts against the golden model with the same
//! observation points as the simulator.

use std::collections::BTreeMap;

use super::model::{CompiledFsm, GoldenError, GoldenState, ResetKind};
use crate::corpus::{StimulusScript, StimulusStep};
use crate::logic::LogicVec;
use crate::sim::{ObsKind, Snapshot, Trace};

/// Golden-side mirror of the simulator state. `state` is `None` until the
/// first reset, and whenever an unknown input reaches a clock edge.
#[derive(Debug, Clone)]
pub struct GoldenRunner<'m> {
    m: &'m CompiledFsm,
    pub state: Option<GoldenState>,
    pub inputs: BTreeMap<String, LogicVec>,
    pub cycle: u64,
}

impl<'m> GoldenRunner<'m> {
    pub fn new(m: &'m CompiledFsm) -> Self {
        let model = m.model();
        let mut inputs: BTreeMap<String, LogicVec> = model
            .inputs
            .iter()
            .map(|s| (s.name.clone(), LogicVec::all_x(s.width)))
            .collect();
        if let Some(r) = &model.reset_signal {
            inputs.insert(r.clone(), LogicVec::all_x(1));
        }
        let state = (model.reset_kind == ResetKind::None).then(|| m.reset_state());
        GoldenRunner {
            m,
            state,
            inputs,
            cycle: 0,
        }
    }

    pub fn set_input(&mut self, name: &str, value: u64) -> Result<(), GoldenError> {
        let slot = self
            .inputs
            .get_mut(name)
            .ok_or_else(|| GoldenError::Invalid(format!("unknown input '{name}'")))?;
        *slot = LogicVec::from_u64(slot.width(), value);
        Ok(())
    }

    pub fn hold_reset(&mut self, active: bool) -> Result<(), GoldenError> {
        let model = self.m.model();
        let r = model
            .reset_signal
            .clone()
            .ok_or_else(|| GoldenError::Invalid("the problem has no reset input".into()))?;
        self.set_input(&r, u64::from(active == model.reset_active_high))
    }

    /// Reset level: `Some(true)` when asserted, `None` when unknown.
    fn reset_asserted(&self) -> Option<bool> {
        let model = self.m.model();
        let r = model.reset_signal.as_ref()?;
        self.inputs[r].to_u64().map(|v| (v == 1) == model.reset_active_high)
    }

    fn data_inputs(&self) -> Option<Vec<LogicVec>> {
        let v: Vec<LogicVec> = self.m.model().inputs.iter().map(|s| self.inputs[&s.name]).collect();
        v.iter().all(LogicVec::is_known).then_some(v)
    }

    pub fn settle(&mut self) {
        if self.m.model().reset_kind == ResetKind::Asynchronous {
            match self.reset_asserted() {
                Some(true) => self.state = Some(self.m.reset_state()),
                Some(false) => {}
                None => self.state = None,
            }
        }
    }

    pub fn tick(&mut self) -> Result<(), GoldenError> {
        self.settle();
        self.cycle += 1;
        if self.m.model().clock.is_none() {
            return Ok(());
        }
        self.state = match (self.reset_asserted(), &self.state) {
            (Some(true), _) => Some(self.m.reset_state()),
            (None, _) if self.m.model().reset_kind != ResetKind::None => None,
            (_, None) => None,
            (_, Some(s)) => match self.data_inputs() {
                Some(iv) => Some(self.m.next(s, &iv)?),
                None => None,
            },
        };
        self.settle();
        Ok(())
    }

    /// Expected outputs; unknown bits are don't-cares.
    pub fn outputs(&self) -> BTreeMap<String, LogicVec> {
        let model = self.m.model();
        let values = match (&self.state, self.data_inputs()) {
            (Some(s), Some(iv)) => self.m.outputs(s, &iv),
            (Some(s), None) => {
                // Moore outputs do not depend on inputs; Mealy ones become unknown.
                let iv: Vec<LogicVec> = model.inputs.iter().map(|s| self.inputs[&s.name]).collect();
                self.m.outputs(s, &iv)
            }
            (None, _) => model.outputs.iter().map(|o| LogicVec::all_x(o.width)).collect(),
        };
        model.outputs.iter().zip(values).map(|(o, v)| (o.name.clone(), v)).collect()
    }

    pub fn snapshot(&self, step: usize, kind: ObsKind) -> Snapshot {
        let model = self.m.model();
        let registers = model
            .registers
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let v = self.state.as_ref().map(|s| s.regs[i]).unwrap_or(LogicVec::all_x(r.width));
                (r.name.clone(), v)
            })
            .collect();
        Snapshot {
            step,
            kind,
            cycle: self.cycle,
            inputs: self.inputs.clone(),
            outputs: self.outputs(),
            registers,
            state: self.state.as_ref().map(|s| self.m.state_name(s.state).to_string()),
        }
    }
}

/// Runs a script on the golden model. `HoldReset` changes the state at once
/// only for an asynchronous reset.
pub fn golden_run(m: &CompiledFsm, script: &StimulusScript) -> Result<Trace, GoldenError> {
    let mut g = GoldenRunner::new(m);
    let mut trace = Trace::default();
    for (i, step) in script.steps.iter().enumerate() {
        match step {
            StimulusStep::SetInputs(values) => {
                for (k, v) in values {
                    g.set_input(k, *v)?;
                }
            }
            StimulusStep::HoldReset(active) => g.hold_reset(*active)?,
            StimulusStep::Settle => {
                g.settle();
                trace.snapshots.push(g.snapshot(i, ObsKind::Settle));
            }
            StimulusStep::Tick => {
                g.tick()?;
                trace.snapshots.push(g.snapshot(i, ObsKind::Tick));
            }
        }
    }
    Ok(trace)
}
