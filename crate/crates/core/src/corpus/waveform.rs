//! Example-behavior tables and their markdown form.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveformRow {
    pub signal: String,
    pub values: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveformTable {
    pub cycles: Vec<u32>,
    pub rows: Vec<WaveformRow>,
}

impl WaveformTable {
    pub fn check(&self) -> Result<(), String> {
        if self.cycles.windows(2).any(|w| w[0] >= w[1]) {
            return Err("waveform cycles must be strictly increasing".into());
        }
        for r in &self.rows {
            if r.values.len() != self.cycles.len() {
                return Err(format!("waveform row '{}' must have one value per cycle", r.signal));
            }
            if r.values.iter().any(|v| *v > 1) {
                return Err(format!("waveform row '{}' values must be 0 or 1", r.signal));
            }
        }
        Ok(())
    }

    pub fn row(&self, signal: &str) -> Option<&WaveformRow> {
        self.rows.iter().find(|r| r.signal == signal)
    }
}

/// Renders a pipe table with a `clk` header row of cycle numbers.
pub fn render_waveform(w: &WaveformTable) -> String {
    let name_w = w.rows.iter().map(|r| r.signal.len()).chain([3]).max().unwrap_or(3);
    let col_w: Vec<usize> = w.cycles.iter().map(|c| c.to_string().len()).collect();
    let line = |first: &str, cells: Vec<String>| {
        let mut s = format!("| {first:<name_w$} |");
        for (c, width) in cells.iter().zip(&col_w) {
            s.push_str(&format!(" {c:<width$} |"));
        }
        s.push('\n');
        s
    };
    let mut out = line("clk", w.cycles.iter().map(|c| c.to_string()).collect());
    out.push_str(&format!("|{}|", "-".repeat(name_w + 2)));
    for width in &col_w {
        out.push_str(&"-".repeat(width + 2));
        out.push('|');
    }
    out.push('\n');
    for r in &w.rows {
        out.push_str(&line(&r.signal, r.values.iter().map(|v| v.to_string()).collect()));
    }
    out
}

/// Parses a table produced by [`render_waveform`] (or written by hand in the
/// same shape).
pub fn parse_waveform(text: &str) -> Result<WaveformTable, String> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| l.starts_with('|'))
        .map(|l| {
            l.trim_matches('|')
                .split('|')
                .map(|c| c.trim().to_string())
                .collect::<Vec<String>>()
        });
    let header = lines.next().ok_or("missing header row")?;
    if header.first().map(String::as_str) != Some("clk") {
        return Err("header row must start with 'clk'".into());
    }
    let cycles = header[1..]
        .iter()
        .map(|c| c.parse::<u32>().map_err(|_| format!("bad cycle label '{c}'")))
        .collect::<Result<Vec<u32>, String>>()?;
    let sep = lines.next().ok_or("missing separator row")?;
    if !sep.iter().all(|c| !c.is_empty() && c.chars().all(|ch| ch == '-' || ch == ':')) {
        return Err("malformed separator row".into());
    }
    let mut rows = Vec::new();
    for cells in lines {
        let (name, vals) = cells.split_first().ok_or("empty row")?;
        let values = vals
            .iter()
            .map(|v| v.parse::<u8>().map_err(|_| format!("bad value '{v}' in row '{name}'")))
            .collect::<Result<Vec<u8>, String>>()?;
        rows.push(WaveformRow {
            signal: name.clone(),
            values,
        });
    }
    let w = WaveformTable { cycles, rows };
    w.check()?;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lemmings() -> WaveformTable {
        let row = |s: &str, v: [u8; 5]| WaveformRow {
            signal: s.into(),
            values: v.to_vec(),
        };
        WaveformTable {
            cycles: vec![1, 2, 3, 4, 5],
            rows: vec![
                row("bump_left", [0, 0, 0, 0, 0]),
                row("bump_right", [0, 0, 1, 0, 0]),
                row("walk_left", [1, 1, 1, 1, 1]),
                row("walk_right", [0, 0, 0, 0, 0]),
            ],
        }
    }

    #[test]
    fn lemmings_table_layout() {
        let expected = "\
| clk        | 1 | 2 | 3 | 4 | 5 |
|------------|---|---|---|---|---|
| bump_left  | 0 | 0 | 0 | 0 | 0 |
| bump_right | 0 | 0 | 1 | 0 | 0 |
| walk_left  | 1 | 1 | 1 | 1 | 1 |
| walk_right | 0 | 0 | 0 | 0 | 0 |
";
        assert_eq!(render_waveform(&lemmings()), expected);
    }

    #[test]
    fn single_cell_table_has_three_lines() {
        let w = WaveformTable {
            cycles: vec![1],
            rows: vec![WaveformRow {
                signal: "a".into(),
                values: vec![0],
            }],
        };
        assert_eq!(render_waveform(&w).lines().count(), 3);
    }

    fn table() -> impl Strategy<Value = WaveformTable> {
        (1usize..=32, 1usize..=8).prop_flat_map(|(n, m)| {
            (
                proptest::collection::btree_set(0u32..1000, n),
                proptest::collection::vec(
                    ("[a-z][a-z0-9_]{0,10}", proptest::collection::vec(0u8..=1, n)),
                    m,
                ),
            )
                .prop_map(|(cycles, rows)| WaveformTable {
                    cycles: cycles.into_iter().collect(),
                    rows: rows
                        .into_iter()
                        .map(|(signal, values)| WaveformRow { signal, values })
                        .collect(),
                })
        })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(w in table()) {
            let text = render_waveform(&w);
            let back = parse_waveform(&text).unwrap();
            prop_assert_eq!(&back, &w);
            prop_assert_eq!(render_waveform(&back), text);
        }
    }
}
