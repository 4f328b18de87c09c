//! Random FSM pairs and a brute-force lockstep oracle shared by the
//! property and acceptance tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write;

use fsmsmith::corpus::{StimulusScript, StimulusStep};
use fsmsmith::elab::{elaborate, Design};
use fsmsmith::golden::{
    equiv_check, CompiledFsm, EquivConfig, FsmModel, GoldenRunner, MealyRule, ResetKind, SignalDecl, Transition, Verdict,
};
use fsmsmith::logic::LogicVec;
use fsmsmith::sim::Simulator;
use fsmsmith::sv::parse_source;
use rand::seq::SliceRandom;
use rand::Rng;

/// A transition table over a single input vector `in` and output `out`.
#[derive(Debug, Clone)]
pub struct Table {
    pub in_width: u32,
    pub out_width: u32,
    pub reset: usize,
    pub async_reset: bool,
    /// `next[s][v]` for every input value `v`.
    pub next: Vec<Vec<usize>>,
    pub moore: Vec<u64>,
    /// Per state, outputs that override the Moore value for given inputs.
    pub mealy: Vec<BTreeMap<u64, u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    None,
    NextState,
    MooreOutput,
    SplitState,
    ResetStyle,
    ResetState,
}

pub struct Pair {
    pub golden: FsmModel,
    pub source: String,
    pub mutation: Mutation,
}

impl Table {
    pub fn states(&self) -> usize {
        self.next.len()
    }

    fn values(&self) -> u64 {
        1 << self.in_width
    }

    pub fn random(rng: &mut impl Rng, max_states: usize, max_in_bits: u32) -> Table {
        let n = rng.gen_range(2..=max_states);
        let in_width = rng.gen_range(1..=max_in_bits);
        let out_width = rng.gen_range(1..=2);
        let values = 1u64 << in_width;
        let next = (0..n).map(|_| (0..values).map(|_| rng.gen_range(0..n)).collect()).collect();
        let moore = (0..n).map(|_| rng.gen_range(0..1u64 << out_width)).collect();
        let mut mealy = vec![BTreeMap::new(); n];
        if rng.gen_bool(0.3) {
            let s = rng.gen_range(0..n);
            mealy[s].insert(rng.gen_range(0..values), rng.gen_range(0..1u64 << out_width));
        }
        Table {
            in_width,
            out_width,
            reset: rng.gen_range(0..n),
            async_reset: rng.gen_bool(0.5),
            next,
            moore,
            mealy,
        }
    }

    pub fn model(&self) -> FsmModel {
        let name = |s: usize| format!("S{s}");
        let lit = |w: u32, v: u64| format!("{w}'d{v}");
        let mut transitions = BTreeMap::new();
        let mut moore_outputs = BTreeMap::new();
        let mut mealy_rules = Vec::new();
        for s in 0..self.states() {
            let last = self.values() - 1;
            let rules = (0..=last)
                .map(|v| Transition {
                    guard: if v == last {
                        "1".into()
                    } else {
                        format!("in == {}", lit(self.in_width, v))
                    },
                    next: name(self.next[s][v as usize]),
                    updates: BTreeMap::new(),
                })
                .collect();
            transitions.insert(name(s), rules);
            moore_outputs.insert(name(s), BTreeMap::from([("out".to_string(), lit(self.out_width, self.moore[s]))]));
            for (&v, &o) in &self.mealy[s] {
                mealy_rules.push(MealyRule {
                    state: name(s),
                    guard: format!("in == {}", lit(self.in_width, v)),
                    outputs: BTreeMap::from([("out".to_string(), lit(self.out_width, o))]),
                });
            }
        }
        FsmModel {
            states: (0..self.states()).map(name).collect(),
            reset_state: name(self.reset),
            reset_kind: if self.async_reset {
                ResetKind::Asynchronous
            } else {
                ResetKind::Synchronous
            },
            clock: Some("clk".into()),
            reset_signal: Some("reset".into()),
            reset_active_high: true,
            inputs: vec![SignalDecl {
                name: "in".into(),
                width: self.in_width,
                lsb: 0,
            }],
            outputs: vec![SignalDecl {
                name: "out".into(),
                width: self.out_width,
                lsb: 0,
            }],
            registers: Vec::new(),
            transitions,
            moore_outputs,
            mealy_rules,
        }
    }

    /// Copy with state `s` duplicated; predecessors pick either copy.
    fn split(&self, rng: &mut impl Rng, s: usize) -> Table {
        let mut t = self.clone();
        let copy = t.states();
        t.next.push(self.next[s].clone());
        t.moore.push(self.moore[s]);
        t.mealy.push(self.mealy[s].clone());
        for row in &mut t.next {
            for n in row.iter_mut() {
                if *n == s && rng.gen_bool(0.5) {
                    *n = copy;
                }
            }
        }
        t
    }

    pub fn mutate(&self, rng: &mut impl Rng, m: Mutation) -> Table {
        let mut t = self.clone();
        let n = t.states();
        match m {
            Mutation::None => {}
            Mutation::NextState => {
                let s = rng.gen_range(0..n);
                let v = rng.gen_range(0..t.values() as usize);
                t.next[s][v] = (t.next[s][v] + rng.gen_range(1..n)) % n;
            }
            Mutation::MooreOutput => {
                let s = rng.gen_range(0..n);
                t.moore[s] ^= 1 << rng.gen_range(0..t.out_width);
            }
            Mutation::SplitState => {
                let s = rng.gen_range(0..n);
                t = t.split(rng, s);
            }
            Mutation::ResetStyle => t.async_reset = !t.async_reset,
            Mutation::ResetState => t.reset = (t.reset + rng.gen_range(1..n)) % n,
        }
        t
    }

    /// A hand-style implementation with a random state encoding.
    pub fn systemverilog(&self, rng: &mut impl Rng) -> String {
        let n = self.states();
        let one_hot = rng.gen_bool(0.3);
        let (sw, codes): (u32, Vec<u64>) = if one_hot {
            (n as u32, (0..n).map(|i| 1u64 << i).collect())
        } else {
            let sw = (usize::BITS - (n - 1).leading_zeros()).max(1) + rng.gen_range(0..=1);
            let mut all: Vec<u64> = (0..1u64 << sw).collect();
            all.shuffle(rng);
            (sw, all[..n].to_vec())
        };
        let (iw, ow) = (self.in_width, self.out_width);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "module top_module(input clk, input reset, input [{}:0] in, output reg [{}:0] out);",
            iw - 1,
            ow - 1
        );
        let _ = writeln!(s, "    reg [{}:0] state, next;", sw - 1);
        s.push_str("    always @(*) begin\n        case (state)\n");
        for st in 0..n {
            let _ = writeln!(s, "            {sw}'d{}: case (in)", codes[st]);
            for v in 0..self.values() {
                let _ = writeln!(s, "                {iw}'d{v}: next = {sw}'d{};", codes[self.next[st][v as usize]]);
            }
            let _ = writeln!(s, "                default: next = {sw}'d{};", codes[self.reset]);
            s.push_str("            endcase\n");
        }
        let _ = writeln!(s, "            default: next = {sw}'d{};", codes[self.reset]);
        s.push_str("        endcase\n    end\n");
        if self.async_reset {
            s.push_str("    always @(posedge clk, posedge reset) begin\n");
        } else {
            s.push_str("    always @(posedge clk) begin\n");
        }
        let _ = writeln!(s, "        if (reset) state <= {sw}'d{};", codes[self.reset]);
        s.push_str("        else state <= next;\n    end\n");
        s.push_str("    always @(*) begin\n        case (state)\n");
        for (st, code) in codes.iter().enumerate().take(n) {
            if self.mealy[st].is_empty() {
                let _ = writeln!(s, "            {sw}'d{}: out = {ow}'d{};", code, self.moore[st]);
            } else {
                let _ = writeln!(s, "            {sw}'d{}: case (in)", code);
                for (v, o) in &self.mealy[st] {
                    let _ = writeln!(s, "                {iw}'d{v}: out = {ow}'d{o};");
                }
                let _ = writeln!(s, "                default: out = {ow}'d{};", self.moore[st]);
                s.push_str("            endcase\n");
            }
        }
        let _ = writeln!(s, "            default: out = {ow}'d0;");
        s.push_str("        endcase\n    end\nendmodule\n");
        s
    }
}

const MUTATIONS: [Mutation; 6] = [
    Mutation::None,
    Mutation::NextState,
    Mutation::MooreOutput,
    Mutation::SplitState,
    Mutation::ResetStyle,
    Mutation::ResetState,
];

pub fn random_pair(rng: &mut impl Rng, max_states: usize, max_in_bits: u32) -> Pair {
    let golden = Table::random(rng, max_states, max_in_bits);
    let mutation = *MUTATIONS.choose(rng).unwrap();
    let dut = golden.mutate(rng, mutation);
    Pair {
        golden: golden.model(),
        source: dut.systemverilog(rng),
        mutation,
    }
}

pub fn design(source: &str) -> Design {
    let parsed = parse_source(source).unwrap_or_else(|e| panic!("{e:?}\n{source}"));
    elaborate(&parsed.module).unwrap_or_else(|e| panic!("{e:?}\n{source}"))
}

type Cycle = (u64, u64);

/// Replays `seq` (reset level, input value) from a fresh reset. Returns
/// whether the last cycle showed an output mismatch, and the joint state
/// after its clock edge.
fn replay(d: &Design, m: &CompiledFsm, seq: &[Cycle]) -> (bool, String) {
    let mut sim = Simulator::new(d);
    let mut g = GoldenRunner::new(m);
    let apply = |sim: &mut Simulator, g: &mut GoldenRunner, (r, v): Cycle| {
        sim.set_input("reset", r).unwrap();
        sim.set_input("in", v).unwrap();
        g.set_input("reset", r).unwrap();
        g.set_input("in", v).unwrap();
        sim.settle().unwrap();
        g.settle();
    };
    apply(&mut sim, &mut g, (1, 0));
    sim.tick().unwrap();
    g.tick().unwrap();
    let mut bad = false;
    for &c in seq {
        apply(&mut sim, &mut g, c);
        let got: LogicVec = sim.value("out").unwrap();
        bad = !got.matches_expected(&g.outputs()["out"]);
        sim.tick().unwrap();
        g.tick().unwrap();
    }
    (bad, format!("{:?}|{:?}", g.state, sim.state_key()))
}

/// Length of the shortest input sequence, up to `depth` cycles, whose last
/// cycle shows differing outputs. Every sequence is covered: extensions of
/// a prefix are skipped only when another prefix of the same or smaller
/// length reached the same joint state.
pub fn lockstep_oracle(d: &Design, m: &FsmModel, depth: usize) -> Option<usize> {
    let cm = m.compile().unwrap();
    let bits = m.inputs[0].width;
    let alphabet: Vec<Cycle> = (0..2u64).flat_map(|r| (0..1u64 << bits).map(move |v| (r, v))).collect();
    let mut seen: HashSet<String> = HashSet::from([replay(d, &cm, &[]).1]);
    let mut frontier: Vec<Vec<Cycle>> = vec![Vec::new()];
    for len in 1..=depth {
        let mut next = Vec::new();
        for prefix in &frontier {
            for &c in &alphabet {
                let mut seq = prefix.clone();
                seq.push(c);
                let (bad, key) = replay(d, &cm, &seq);
                if bad {
                    return Some(len);
                }
                if seen.insert(key) {
                    next.push(seq);
                }
            }
        }
        frontier = next;
    }
    None
}

/// Runs the equivalence checker and the oracle on one pair. A
/// counterexample must have the oracle's shortest length; one longer than
/// `depth` cannot be confirmed by the oracle and is accepted.
pub fn compare(pair: &Pair, depth: usize) -> Result<Verdict, String> {
    let d = design(&pair.source);
    let verdict = equiv_check(&d, &pair.golden, &EquivConfig::default()).map_err(|e| e.to_string())?;
    let oracle = lockstep_oracle(&d, &pair.golden, depth);
    let agree = match (&verdict, oracle) {
        (Verdict::Equivalent, None) => true,
        (Verdict::Counterexample(cx), Some(n)) => cx.inputs.len() == n,
        (Verdict::Counterexample(cx), None) => cx.inputs.len() > depth,
        _ => false,
    };
    if agree {
        Ok(verdict)
    } else {
        Err(format!(
            "checker {verdict:?}\noracle {oracle:?}\nmutation {:?}\n{}",
            pair.mutation, pair.source
        ))
    }
}

/// Reference implementations of every corpus problem plus the correct
/// hand-written solutions, with the problem each belongs to.
pub fn sample_designs() -> Vec<(fsmsmith::corpus::ProblemSpec, String)> {
    let corpus = fsmsmith::corpus::bundled_corpus().unwrap();
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/solutions");
    let mut out = Vec::new();
    for p in corpus.problems() {
        out.push((p.clone(), fsmsmith::golden::to_systemverilog(p)));
        if let Ok(code) = std::fs::read_to_string(dir.join(&p.id).join("correct.sv")) {
            out.push((p.clone(), code));
        }
    }
    out
}

pub fn random_script(rng: &mut impl Rng, p: &fsmsmith::corpus::ProblemSpec) -> StimulusScript {
    let len = rng.gen_range(1..40);
    let mut steps = Vec::with_capacity(len);
    for _ in 0..len {
        steps.push(match rng.gen_range(0..10) {
            0..=3 => {
                let mut values = BTreeMap::new();
                for port in p.data_inputs().chain(p.reset_port()) {
                    if rng.gen_bool(0.7) {
                        let mask = if port.width >= 64 { u64::MAX } else { (1u64 << port.width) - 1 };
                        values.insert(port.name.clone(), rng.gen::<u64>() & mask);
                    }
                }
                StimulusStep::SetInputs(values)
            }
            4..=6 => StimulusStep::Tick,
            7..=8 => StimulusStep::Settle,
            _ => StimulusStep::HoldReset(rng.gen_bool(0.5)),
        });
    }
    StimulusScript { steps }
}

fn without_step(s: &fsmsmith::sim::Snapshot) -> fsmsmith::sim::Snapshot {
    fsmsmith::sim::Snapshot { step: 0, ..s.clone() }
}

/// Repeating a `Settle` or following a `Tick` with a `Settle` adds an
/// observation equal to the previous one and changes no other observation.
pub fn check_extra_settle(
    rng: &mut impl Rng,
    d: &Design,
    script: &StimulusScript,
    pin: Option<&fsmsmith::sim::ResetPin>,
) -> Result<(), String> {
    let mut steps = Vec::new();
    let mut inserted = Vec::new();
    for step in &script.steps {
        steps.push(step.clone());
        if matches!(step, StimulusStep::Settle | StimulusStep::Tick) && rng.gen_bool(0.5) {
            inserted.push(steps.len());
            steps.push(StimulusStep::Settle);
        }
    }
    let base = fsmsmith::sim::run(d, script, pin);
    let more = fsmsmith::sim::run(d, &StimulusScript { steps: steps.clone() }, pin);
    let (base, more) = match (base, more) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(a), Err(b)) if a == b => return Ok(()),
        (a, b) => return Err(format!("runs disagree: {:?} vs {:?}", a.err(), b.err())),
    };
    let mut kept = Vec::new();
    let mut prev: Option<&fsmsmith::sim::Snapshot> = None;
    for snap in &more.snapshots {
        if inserted.contains(&snap.step) {
            if let Some(p) = prev {
                let same = |s: &fsmsmith::sim::Snapshot| fsmsmith::sim::Snapshot {
                    kind: fsmsmith::sim::ObsKind::Settle,
                    ..without_step(s)
                };
                if same(p) != same(snap) {
                    return Err(format!("settle after step {} changed {:?} into {:?}", snap.step - 1, p, snap));
                }
            }
        } else {
            kept.push(without_step(snap));
        }
        prev = Some(snap);
    }
    let base: Vec<_> = base.snapshots.iter().map(without_step).collect();
    if base != kept {
        let i = base.iter().zip(&kept).position(|(a, b)| a != b).unwrap_or(base.len().min(kept.len()));
        return Err(format!(
            "observation {i} differs after inserting settles at {inserted:?}:\n{:?}\n{:?}\nscript {:?}",
            base.get(i),
            kept.get(i),
            steps
        ));
    }
    Ok(())
}

const FRAGMENTS: &[&str] = &[
    "module", "endmodule", "always", "always_ff", "always_comb", "@(posedge clk)", "@(*)", "begin", "end", "if",
    "else", "case", "endcase", "default:", "assign", "reg", "logic", "wire", "[3:0]", "<=", "=", ";", ",", "(",
    ")", "{", "}", "?", ":", "'x", "4'b10x1", "8'hFF", "'d", "32'd", "typedef enum", "parameter", "localparam",
    "state", "next", "//", "/*", "*/", "\"", "`define", "\\esc ", "\n", "\t", "€", "\0", "~^", ">>>", "**",
];

/// A source text: random bytes, random fragments, or an edited valid module.
pub fn fuzz_input(rng: &mut impl Rng, seeds: &[String]) -> String {
    let limit = rng.gen_range(0..=4096usize);
    let mut out = match rng.gen_range(0..3) {
        0 => {
            let bytes: Vec<u8> = (0..limit).map(|_| rng.gen()).collect();
            String::from_utf8_lossy(&bytes).into_owned()
        }
        1 => {
            let mut s = String::new();
            while s.len() < limit {
                s.push_str(FRAGMENTS.choose(rng).unwrap());
                s.push(' ');
            }
            s
        }
        _ => {
            let mut s: Vec<char> = seeds.choose(rng).unwrap().chars().collect();
            for _ in 0..rng.gen_range(1..8) {
                if s.is_empty() {
                    break;
                }
                let at = rng.gen_range(0..s.len());
                let end = (at + rng.gen_range(0..20)).min(s.len());
                match rng.gen_range(0..3) {
                    0 => {
                        s.drain(at..end);
                    }
                    1 => {
                        let piece: Vec<char> = s[at..end].to_vec();
                        s.splice(at..at, piece);
                    }
                    _ => {
                        let piece: Vec<char> = FRAGMENTS.choose(rng).unwrap().chars().collect();
                        s.splice(at..at, piece);
                    }
                }
            }
            s.into_iter().collect()
        }
    };
    while out.len() > 4096 {
        out.pop();
    }
    out
}

/// Lexes, parses and, when that succeeds, elaborates `source`; any panic is
/// reported as an error.
pub fn front_end_survives(source: &str) -> Result<(), String> {
    std::panic::catch_unwind(|| {
        let _ = fsmsmith::sv::lex(source);
        if let Ok(parsed) = parse_source(source) {
            let _ = elaborate(&parsed.module);
        }
    })
    .map_err(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        format!("panic on input {source:?}: {msg}")
    })
}
