//! Problem files compiled into the library.

use std::path::Path;

use super::{parse_problem, Corpus, CorpusError};

const FILES: &[(&str, &str)] = &[
    ("Fsm1.problem.json", include_str!("../../../../corpus/Fsm1.problem.json")),
    ("Fsm1s.problem.json", include_str!("../../../../corpus/Fsm1s.problem.json")),
    ("Fsm2.problem.json", include_str!("../../../../corpus/Fsm2.problem.json")),
    ("Fsm2s.problem.json", include_str!("../../../../corpus/Fsm2s.problem.json")),
    ("Fsm3.problem.json", include_str!("../../../../corpus/Fsm3.problem.json")),
    ("Fsm3comb.problem.json", include_str!("../../../../corpus/Fsm3comb.problem.json")),
    ("Fsm3onehot.problem.json", include_str!("../../../../corpus/Fsm3onehot.problem.json")),
    ("Fsm3s.problem.json", include_str!("../../../../corpus/Fsm3s.problem.json")),
    ("Fsm_hdlc.problem.json", include_str!("../../../../corpus/Fsm_hdlc.problem.json")),
    ("Fsm_onehot.problem.json", include_str!("../../../../corpus/Fsm_onehot.problem.json")),
    ("Fsm_ps2.problem.json", include_str!("../../../../corpus/Fsm_ps2.problem.json")),
    ("Fsm_ps2data.problem.json", include_str!("../../../../corpus/Fsm_ps2data.problem.json")),
    ("Fsm_serial.problem.json", include_str!("../../../../corpus/Fsm_serial.problem.json")),
    ("Fsm_serialdata.problem.json", include_str!("../../../../corpus/Fsm_serialdata.problem.json")),
    ("Fsm_serialdp.problem.json", include_str!("../../../../corpus/Fsm_serialdp.problem.json")),
    ("Lemmings1.problem.json", include_str!("../../../../corpus/Lemmings1.problem.json")),
    ("Lemmings2.problem.json", include_str!("../../../../corpus/Lemmings2.problem.json")),
    ("Lemmings3.problem.json", include_str!("../../../../corpus/Lemmings3.problem.json")),
    ("Lemmings4.problem.json", include_str!("../../../../corpus/Lemmings4.problem.json")),
    ("ece241_2013_q4.problem.json", include_str!("../../../../corpus/ece241_2013_q4.problem.json")),
];

/// The 20 benchmark problems shipped with the crate, in file-name order.
pub fn bundled_corpus() -> Result<Corpus, CorpusError> {
    let problems = FILES
        .iter()
        .map(|(name, text)| parse_problem(text, Path::new(name)))
        .collect::<Result<Vec<_>, _>>()?;
    Corpus::new(problems).map_err(|issues| CorpusError::Consistency {
        path: "<bundled>".into(),
        rule: issues
            .iter()
            .map(|i| format!("{}: {:?}", i.spec, i.kind))
            .collect::<Vec<_>>()
            .join("; "),
    })
}
