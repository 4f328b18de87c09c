//! Behavioral equivalence between a design and its golden model.
//!
//! Both machines start from reset. The search walks the product of golden
//! states and design register snapshots breadth-first, applying every input
//! valuation (the reset input included) and comparing outputs before each
//! clock edge. Large searches fall back to seeded random simulation.

use std::collections::{BTreeMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{CompiledFsm, FsmModel, GoldenError, GoldenState, ResetKind};
use super::run::golden_run;
use crate::corpus::{ProblemSpec, StimulusScript, StimulusStep};
use crate::elab::{Design, SigId, SignalKind};
use crate::logic::LogicVec;
use crate::sim::{self, ResetPin, SimError, Simulator, Trace};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomFallback {
    pub sequences: u32,
    pub length: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivConfig {
    pub max_product_states: u64,
    pub max_input_bits_exhaustive: u32,
    pub random_fallback: RandomFallback,
    /// Restricted value sets for inputs in the exhaustive search.
    #[serde(default)]
    pub input_domains: BTreeMap<String, Vec<u64>>,
}

impl Default for EquivConfig {
    fn default() -> Self {
        EquivConfig {
            max_product_states: 1 << 20,
            max_input_bits_exhaustive: 10,
            random_fallback: RandomFallback {
                sequences: 256,
                length: 64,
                seed: 0x5eed_f5a1,
            },
            input_domains: BTreeMap::new(),
        }
    }
}

impl EquivConfig {
    /// Defaults with the problem's overrides applied.
    pub fn for_problem(p: &ProblemSpec) -> Self {
        let mut c = EquivConfig::default();
        if let Some(n) = p.equiv.max_input_bits_exhaustive {
            c.max_input_bits_exhaustive = n;
        }
        if let Some(n) = p.equiv.max_product_states {
            c.max_product_states = n;
        }
        c.input_domains = p.equiv.input_domains.clone();
        c
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Input valuations after the reset sequence; the last one exposes the mismatch.
    pub inputs: Vec<BTreeMap<String, u64>>,
    /// First output that differs.
    pub output: String,
    pub expected: BTreeMap<String, LogicVec>,
    pub actual: BTreeMap<String, LogicVec>,
    pub dut_trace: Trace,
    pub golden_trace: Trace,
}

impl Counterexample {
    /// Stimulus script replaying the counterexample from reset.
    pub fn script(&self, m: &FsmModel) -> StimulusScript {
        counterexample_script(m, &self.inputs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Equivalent,
    Counterexample(Box<Counterexample>),
    Inconclusive(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Golden(#[from] GoldenError),
    #[error("interface mismatch: {0}")]
    Interface(String),
}

/// Steps that bring both machines into reset: all data inputs low, reset
/// asserted, settle, then one clock edge when there is a clock.
pub fn reset_prologue(m: &FsmModel) -> Vec<StimulusStep> {
    let mut values: BTreeMap<String, u64> = m.inputs.iter().map(|s| (s.name.clone(), 0)).collect();
    if let Some(r) = &m.reset_signal {
        values.insert(r.clone(), u64::from(m.reset_active_high));
    }
    let mut steps = vec![StimulusStep::SetInputs(values), StimulusStep::Settle];
    if m.clock.is_some() {
        steps.push(StimulusStep::Tick);
    }
    steps
}

fn counterexample_script(m: &FsmModel, inputs: &[BTreeMap<String, u64>]) -> StimulusScript {
    let mut steps = reset_prologue(m);
    for (i, v) in inputs.iter().enumerate() {
        steps.push(StimulusStep::SetInputs(v.clone()));
        steps.push(StimulusStep::Settle);
        if i + 1 < inputs.len() && m.clock.is_some() {
            steps.push(StimulusStep::Tick);
        }
    }
    StimulusScript { steps }
}

pub(crate) fn reset_pin(m: &FsmModel) -> Option<ResetPin> {
    m.reset_signal.as_ref().map(|name| ResetPin {
        name: name.clone(),
        active_high: m.reset_active_high,
    })
}

/// One input axis of the search space.
struct Axis {
    name: String,
    sig: SigId,
    width: u32,
    domain: Vec<u64>,
}

/// Wiring between the golden model's names and the design's signals.
pub(crate) struct Harness<'a> {
    pub d: &'a Design,
    pub m: &'a CompiledFsm,
    axes: Vec<Axis>,
    reset: Option<(SigId, String)>,
    outputs: Vec<(String, SigId)>,
    edge_inputs: Vec<SigId>,
}

/// Product-state step input: golden state, design state and the previous
/// values of edge-sensitive inputs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Product {
    pub g: GoldenState,
    pub key: Vec<LogicVec>,
    pub prev_edge: Vec<LogicVec>,
}

pub(crate) enum StepOutcome {
    Next(Product),
    Mismatch {
        output: String,
        expected: BTreeMap<String, LogicVec>,
        actual: BTreeMap<String, LogicVec>,
    },
}

fn full_domain(width: u32) -> Vec<u64> {
    (0..(1u64 << width)).collect()
}

impl<'a> Harness<'a> {
    pub fn new(d: &'a Design, m: &'a CompiledFsm, domains: &BTreeMap<String, Vec<u64>>) -> Result<Self, EquivError> {
        let model = m.model();
        let find = |name: &str, kind: SignalKind| -> Result<SigId, EquivError> {
            match d.signal(name) {
                Some(i) if d.signals[i].kind == kind => Ok(i),
                _ => Err(EquivError::Interface(format!("design has no {kind:?} '{name}'"))),
            }
        };
        let mut axes = Vec::new();
        for s in &model.inputs {
            let domain = match domains.get(&s.name) {
                Some(v) => v.clone(),
                None if s.width <= 20 => full_domain(s.width),
                None => Vec::new(),
            };
            axes.push(Axis {
                name: s.name.clone(),
                sig: find(&s.name, SignalKind::Input)?,
                width: s.width,
                domain,
            });
        }
        let reset = match &model.reset_signal {
            Some(r) => Some((find(r, SignalKind::Input)?, r.clone())),
            None => None,
        };
        let outputs = model
            .outputs
            .iter()
            .map(|o| Ok((o.name.clone(), find(&o.name, SignalKind::Output)?)))
            .collect::<Result<Vec<_>, EquivError>>()?;
        let edge_inputs = d
            .edge_signals()
            .into_iter()
            .filter(|&s| d.signals[s].kind == SignalKind::Input && Some(s) != d.clock)
            .collect();
        Ok(Harness {
            d,
            m,
            axes,
            reset,
            outputs,
            edge_inputs,
        })
    }

    /// Number of valuations per step, or `None` when it does not fit in `u64`.
    fn valuations(&self) -> Option<u64> {
        let mut n: u64 = if self.reset.is_some() { 2 } else { 1 };
        for a in &self.axes {
            if a.domain.is_empty() {
                return None;
            }
            n = n.checked_mul(a.domain.len() as u64)?;
        }
        Some(n)
    }

    /// Decodes a valuation index; the reset input is the least significant digit.
    fn decode(&self, mut idx: u64) -> BTreeMap<String, u64> {
        let mut out = BTreeMap::new();
        let model = self.m.model();
        if let Some((_, r)) = &self.reset {
            let active = idx % 2 == 1;
            idx /= 2;
            out.insert(r.clone(), u64::from(active == model.reset_active_high));
        }
        for a in &self.axes {
            let n = a.domain.len() as u64;
            out.insert(a.name.clone(), a.domain[(idx % n) as usize]);
            idx /= n;
        }
        out
    }

    fn random_valuation(&self, rng: &mut ChaCha8Rng) -> BTreeMap<String, u64> {
        let mut out = BTreeMap::new();
        let model = self.m.model();
        if let Some((_, r)) = &self.reset {
            let active = rng.gen_ratio(1, 16);
            out.insert(r.clone(), u64::from(active == model.reset_active_high));
        }
        for a in &self.axes {
            let v = if a.width >= 64 { rng.gen() } else { rng.gen_range(0..(1u64 << a.width)) };
            out.insert(a.name.clone(), v);
        }
        out
    }

    fn reset_active(&self, values: &BTreeMap<String, u64>) -> bool {
        match &self.reset {
            Some((_, r)) => (values[r] == 1) == self.m.model().reset_active_high,
            None => false,
        }
    }

    pub fn simulator(&self) -> Simulator<'a> {
        Simulator::new(self.d)
    }

    /// Applies the reset sequence to a fresh simulator and returns the
    /// initial product state.
    pub fn initial(&self, sim: &mut Simulator<'a>) -> Result<Product, EquivError> {
        let model = self.m.model();
        for a in &self.axes {
            sim.set_input_vec(a.sig, LogicVec::zero(a.width));
        }
        if let Some((r, _)) = &self.reset {
            sim.set_input_vec(*r, LogicVec::from_bool(model.reset_active_high));
        }
        sim.settle()?;
        if model.clock.is_some() {
            sim.tick()?;
        }
        Ok(Product {
            g: self.m.reset_state(),
            key: sim.state_key(),
            prev_edge: self.edge_inputs.iter().map(|&s| sim.get(s)).collect::<Result<_, _>>()?,
        })
    }

    /// One cycle from `from`. With `restore` the simulator is first rewound
    /// to `from`; otherwise it is assumed to be there already.
    pub fn step(
        &self,
        sim: &mut Simulator<'a>,
        from: &Product,
        values: &BTreeMap<String, u64>,
        restore: bool,
    ) -> Result<StepOutcome, EquivError> {
        let model = self.m.model();
        if restore {
            for (&s, v) in self.edge_inputs.iter().zip(&from.prev_edge) {
                sim.set_input_vec(s, *v);
            }
            sim.restore(&from.key);
        }
        for a in &self.axes {
            sim.set_input_vec(a.sig, LogicVec::from_u64(a.width, values[&a.name]));
        }
        if let Some((r, name)) = &self.reset {
            sim.set_input_vec(*r, LogicVec::from_u64(1, values[name]));
        }
        sim.settle()?;

        let reset = self.reset_active(values);
        let g = if reset && model.reset_kind == ResetKind::Asynchronous {
            self.m.reset_state()
        } else {
            from.g.clone()
        };
        let iv = self.m.input_vector(values);
        let expected_vals = self.m.outputs(&g, &iv);
        let mut expected = BTreeMap::new();
        let mut actual = BTreeMap::new();
        let mut first_bad = None;
        for ((name, sig), exp) in self.outputs.iter().zip(expected_vals) {
            let got = sim.get(*sig)?;
            if first_bad.is_none() && !got.matches_expected(&exp) {
                first_bad = Some(name.clone());
            }
            expected.insert(name.clone(), exp);
            actual.insert(name.clone(), got);
        }
        if let Some(output) = first_bad {
            return Ok(StepOutcome::Mismatch {
                output,
                expected,
                actual,
            });
        }

        let next_g = if model.clock.is_none() {
            g
        } else if reset {
            self.m.reset_state()
        } else {
            self.m.next(&g, &iv)?
        };
        sim.tick()?;
        Ok(StepOutcome::Next(Product {
            g: next_g,
            key: sim.state_key(),
            prev_edge: self.edge_inputs.iter().map(|&s| sim.get(s)).collect::<Result<_, _>>()?,
        }))
    }

    fn counterexample(
        &self,
        inputs: Vec<BTreeMap<String, u64>>,
        output: String,
        expected: BTreeMap<String, LogicVec>,
        actual: BTreeMap<String, LogicVec>,
    ) -> Result<Verdict, EquivError> {
        let model = self.m.model();
        let script = counterexample_script(model, &inputs);
        let dut_trace = sim::run(self.d, &script, reset_pin(model).as_ref())?;
        let golden_trace = golden_run(self.m, &script)?;
        Ok(Verdict::Counterexample(Box::new(Counterexample {
            inputs,
            output,
            expected,
            actual,
            dut_trace,
            golden_trace,
        })))
    }
}

struct Node {
    product: Product,
    parent: Option<usize>,
    via: u64,
}

fn path_to(nodes: &[Node], mut i: usize) -> Vec<u64> {
    let mut path = Vec::new();
    while let Some(p) = nodes[i].parent {
        path.push(nodes[i].via);
        i = p;
    }
    path.reverse();
    path
}

/// Checks `d` against `m`. Errors are simulation failures of the design
/// (such as a combinational loop) or golden-model defects.
pub fn equiv_check(d: &Design, m: &FsmModel, cfg: &EquivConfig) -> Result<Verdict, EquivError> {
    let cm = m.compile()?;
    let h = Harness::new(d, &cm, &cfg.input_domains)?;
    let limit = 1u64.checked_shl(cfg.max_input_bits_exhaustive).unwrap_or(u64::MAX);
    let reason = match h.valuations() {
        Some(n) if n <= limit => match exhaustive(&h, n, cfg.max_product_states)? {
            Search::Done(v) if cfg.input_domains.is_empty() => return Ok(v),
            Search::Done(Verdict::Equivalent) => None,
            Search::Done(v) => return Ok(v),
            Search::CapHit => Some(format!("product state cap of {} reached", cfg.max_product_states)),
        },
        _ => Some(format!(
            "input space exceeds 2^{} valuations per cycle",
            cfg.max_input_bits_exhaustive
        )),
    };
    match random_search(&h, &cfg.random_fallback)? {
        Some(v) => Ok(v),
        None => Ok(match reason {
            Some(r) => Verdict::Inconclusive(r),
            None => Verdict::Equivalent,
        }),
    }
}

enum Search {
    Done(Verdict),
    CapHit,
}

fn exhaustive(h: &Harness, valuations: u64, cap: u64) -> Result<Search, EquivError> {
    let mut sim = h.simulator();
    let start = h.initial(&mut sim)?;
    let mut seen: HashSet<Product> = HashSet::new();
    seen.insert(start.clone());
    let mut nodes = vec![Node {
        product: start,
        parent: None,
        via: 0,
    }];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for v in 0..valuations {
            let values = h.decode(v);
            let from = nodes[i].product.clone();
            match h.step(&mut sim, &from, &values, true)? {
                StepOutcome::Mismatch {
                    output,
                    expected,
                    actual,
                } => {
                    let mut inputs: Vec<BTreeMap<String, u64>> =
                        path_to(&nodes, i).into_iter().map(|x| h.decode(x)).collect();
                    inputs.push(values);
                    return h.counterexample(inputs, output, expected, actual).map(Search::Done);
                }
                StepOutcome::Next(p) => {
                    if !seen.contains(&p) {
                        if seen.len() as u64 >= cap {
                            return Ok(Search::CapHit);
                        }
                        seen.insert(p.clone());
                        nodes.push(Node {
                            product: p,
                            parent: Some(i),
                            via: v,
                        });
                        queue.push_back(nodes.len() - 1);
                    }
                }
            }
        }
    }
    Ok(Search::Done(Verdict::Equivalent))
}

fn random_search(h: &Harness, cfg: &RandomFallback) -> Result<Option<Verdict>, EquivError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.sequences {
        let mut sim = h.simulator();
        let mut cur = h.initial(&mut sim)?;
        let mut inputs = Vec::new();
        for _ in 0..cfg.length {
            let values = h.random_valuation(&mut rng);
            inputs.push(values.clone());
            match h.step(&mut sim, &cur, &values, false)? {
                StepOutcome::Mismatch {
                    output,
                    expected,
                    actual,
                } => return h.counterexample(inputs, output, expected, actual).map(Some),
                StepOutcome::Next(p) => cur = p,
            }
        }
    }
    Ok(None)
}
