//! Structural reset-style classification.

use serde::{Deserialize, Serialize};

use super::{Design, ProcClass};
use crate::sv::ast::Edge;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResetStyle {
    Asynchronous,
    Synchronous,
    NoReset,
    Indeterminate,
}

/// Classifies how `reset` is used, looking only at sensitivity lists and the
/// first `if` of each clocked process.
pub fn classify_reset(d: &Design, reset: &str) -> ResetStyle {
    let Some(r) = d.signal(reset) else {
        return ResetStyle::NoReset;
    };
    let (mut asynchronous, mut synchronous, mut other_use) = (false, false, false);
    for p in &d.processes {
        if p.class == ProcClass::Edge {
            if p.sensitivity.iter().any(|s| s.signal == r && s.edge != Edge::Level && Some(r) != p.clock) {
                asynchronous = true;
            } else if p.first_guard.is_some_and(|g| g.signal == r) {
                synchronous = true;
            } else if p.reads.contains(&r) {
                other_use = true;
            }
        } else if p.reads.contains(&r) {
            other_use = true;
        }
    }
    match (asynchronous, synchronous) {
        (true, true) => ResetStyle::Indeterminate,
        (true, false) => ResetStyle::Asynchronous,
        (false, true) => ResetStyle::Synchronous,
        (false, false) if other_use => ResetStyle::Indeterminate,
        (false, false) => ResetStyle::NoReset,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elab::elaborate;
    use crate::sv::parse_source;

    fn style(src: &str) -> ResetStyle {
        let d = elaborate(&parse_source(src).unwrap().module).unwrap();
        classify_reset(&d, "reset")
    }

    #[test]
    fn asynchronous_edge_in_sensitivity() {
        assert_eq!(
            style(
                "module m(input clk, input reset, input a, output logic q);
                 always_ff @(posedge clk, posedge reset) if (reset) q <= 0; else q <= a;
                 endmodule"
            ),
            ResetStyle::Asynchronous
        );
    }

    #[test]
    fn synchronous_first_guard() {
        assert_eq!(
            style(
                "module m(input clk, input reset, input a, output logic q);
                 always_ff @(posedge clk) begin if (reset) q <= 0; else q <= a; end
                 endmodule"
            ),
            ResetStyle::Synchronous
        );
    }

    #[test]
    fn mixed_styles_are_indeterminate() {
        assert_eq!(
            style(
                "module m(input clk, input reset, input a, output logic q, output logic p);
                 always_ff @(posedge clk, posedge reset) if (reset) q <= 0; else q <= a;
                 always_ff @(posedge clk) if (reset) p <= 0; else p <= q;
                 endmodule"
            ),
            ResetStyle::Indeterminate
        );
    }

    #[test]
    fn unused_reset() {
        assert_eq!(
            style(
                "module m(input clk, input reset, input a, output logic q);
                 always_ff @(posedge clk) q <= a;
                 endmodule"
            ),
            ResetStyle::NoReset
        );
    }
}
