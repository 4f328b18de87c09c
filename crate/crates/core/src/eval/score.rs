use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{EvalError, TrialResult};

/// Successes `k` out of `n` trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub k: u32,
    pub n: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    /// Problems with at least one success.
    pub problems_solved: u32,
    /// Exact success fraction as (total successes, total trials).
    pub success_rate: (u64, u64),
    pub success_rate_percent: u64,
}

/// Per-config cells keyed by problem id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub cells: BTreeMap<String, BTreeMap<String, Cell>>,
    pub totals: BTreeMap<String, Totals>,
}

/// `round(100 * num / den)` with halves rounded up; 0 for an empty denominator.
pub fn round_half_up_percent(num: u64, den: u64) -> u64 {
    if den == 0 {
        return 0;
    }
    (200 * num + den) / (2 * den)
}

impl ScoreTable {
    /// Totals derived from one config's cells.
    pub fn totals_of(cells: &BTreeMap<String, Cell>) -> Totals {
        let k: u64 = cells.values().map(|c| u64::from(c.k)).sum();
        let n: u64 = cells.values().map(|c| u64::from(c.n)).sum();
        Totals {
            problems_solved: cells.values().filter(|c| c.k >= 1).count() as u32,
            success_rate: (k, n),
            success_rate_percent: round_half_up_percent(k, n),
        }
    }

    pub fn from_cells(cells: BTreeMap<String, BTreeMap<String, Cell>>) -> ScoreTable {
        let totals = cells.iter().map(|(c, row)| (c.clone(), Self::totals_of(row))).collect();
        ScoreTable { cells, totals }
    }

    /// Same cells with totals recomputed.
    pub fn recomputed(&self) -> ScoreTable {
        Self::from_cells(self.cells.clone())
    }
}

/// Counts passes per (config, problem). Every pair must hold trials
/// `0..n` exactly once, with one `n` per config.
pub fn score(results: &[TrialResult]) -> Result<ScoreTable, EvalError> {
    let mut seen: BTreeMap<(&str, &str), BTreeSet<u32>> = BTreeMap::new();
    let mut passes: BTreeMap<(&str, &str), u32> = BTreeMap::new();
    for r in results {
        let key = (r.config.as_str(), r.problem.as_str());
        if !seen.entry(key).or_default().insert(r.trial) {
            return Err(EvalError::InconsistentTrials(format!(
                "trial {} of {} under {} appears twice",
                r.trial, r.problem, r.config
            )));
        }
        *passes.entry(key).or_default() += u32::from(r.passed());
    }
    let mut cells: BTreeMap<String, BTreeMap<String, Cell>> = BTreeMap::new();
    let mut n_of: BTreeMap<&str, u32> = BTreeMap::new();
    for ((config, problem), trials) in &seen {
        let n = trials.len() as u32;
        if trials.iter().copied().ne(0..n) {
            return Err(EvalError::InconsistentTrials(format!(
                "{problem} under {config} does not have trials 0..{n}"
            )));
        }
        let expected = *n_of.entry(config).or_insert(n);
        if expected != n {
            return Err(EvalError::InconsistentTrials(format!(
                "{problem} under {config} has {n} trials, other problems have {expected}"
            )));
        }
        cells.entry(config.to_string()).or_default().insert(
            problem.to_string(),
            Cell {
                k: passes[&(*config, *problem)],
                n,
            },
        );
    }
    Ok(ScoreTable::from_cells(cells))
}
