use std::path::PathBuf;
use std::time::Instant;

use fsmsmith::corpus::{Corpus, StimulusScript, Tag};
use fsmsmith::elab::{check_interface, elaborate};
use fsmsmith::golden::{equiv_check, golden_run, reset_compliance, to_systemverilog, Compliance, EquivConfig, Verdict};
use fsmsmith::sim::{self, ObsKind, ResetPin};
use fsmsmith::sv::parse_source;

fn corpus() -> Corpus {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    Corpus::load_dir(&dir).expect("bundled corpus loads")
}

#[test]
fn corpus_has_twenty_problems() {
    let c = corpus();
    assert_eq!(c.problems().len(), 20);
    let lem1 = c.get("Lemmings1").unwrap();
    assert!(lem1
        .spec_markdown
        .starts_with("The game Lemmings involves critters with fairly simple brains."));
    assert!(lem1.tags.contains(&Tag::AsyncReset));
    assert_eq!(c.predecessor(c.get("Fsm3onehot").unwrap()).unwrap().id, "Fsm3comb");
}

#[test]
fn reference_solutions_are_equivalent_to_their_golden_models() {
    for p in corpus().problems() {
        let t = Instant::now();
        let src = to_systemverilog(p);
        let parsed = parse_source(&src).unwrap_or_else(|e| panic!("{}: {e:?}\n{src}", p.id));
        let d = elaborate(&parsed.module).unwrap_or_else(|e| panic!("{}: {e:?}\n{src}", p.id));
        check_interface(&d, p).unwrap_or_else(|e| panic!("{}: {e:?}", p.id));
        let rc = reset_compliance(&d, &p.golden).unwrap();
        assert!(
            matches!(rc.outcome, Compliance::Ok | Compliance::NotApplicable),
            "{}: {rc:?}",
            p.id
        );
        let cfg = EquivConfig::for_problem(p);
        let v = equiv_check(&d, &p.golden, &cfg).unwrap();
        assert_eq!(v, Verdict::Equivalent, "{}\n{src}", p.id);
        eprintln!("{}: {:?}", p.id, t.elapsed());
    }
}

#[test]
fn waveforms_match_golden_and_reference() {
    for p in corpus().problems() {
        let Some(w) = &p.waveform else { continue };
        let script = StimulusScript::from_waveform(p, w);
        let cm = p.golden.compile().unwrap();
        let gt = golden_run(&cm, &script).unwrap();
        let src = to_systemverilog(p);
        let d = elaborate(&parse_source(&src).unwrap().module).unwrap();
        let pin = p.reset_port().map(|r| ResetPin {
            name: r.name.clone(),
            active_high: p.golden.reset_active_high,
        });
        let dt = sim::run(&d, &script, pin.as_ref()).unwrap();
        for trace in [&gt, &dt] {
            let obs: Vec<_> = trace.snapshots.iter().filter(|s| s.kind == ObsKind::Settle).collect();
            // The first observation belongs to the reset prologue.
            let obs = &obs[obs.len() - w.cycles.len()..];
            for row in &w.rows {
                for (i, snap) in obs.iter().enumerate() {
                    let v = snap.inputs.get(&row.signal).or_else(|| snap.outputs.get(&row.signal));
                    let v = v.unwrap_or_else(|| panic!("{}: no signal {}", p.id, row.signal));
                    assert_eq!(v.to_u64(), Some(u64::from(row.values[i])), "{} {} cycle {i}", p.id, row.signal);
                }
            }
        }
    }
}
