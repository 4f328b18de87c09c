//! Checks an elaborated design against the interface a problem prescribes.

use super::{Design, SignalKind};
use crate::corpus::{PortDirection, ProblemSpec};
use crate::sv::ast::Pos;
use crate::sv::diag::{DiagCode, Diagnostic};

/// Compares module name and ports (name, direction, width; order-insensitive)
/// and the one-hot state-vector side condition when the problem declares one.
pub fn check_interface(d: &Design, p: &ProblemSpec) -> Result<(), Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let at = |pos: Pos| (pos.line.max(1), pos.column.max(1));
    let module_pos = d.signals.first().map(|s| s.pos).unwrap_or_default();
    let err = |msg: String, pos: Pos| {
        let (l, c) = at(pos);
        Diagnostic::error(DiagCode::Interface, msg, l, c)
    };

    if d.name != p.module_name {
        diags.push(
            err(format!("module is named '{}'", d.name), module_pos)
                .with_note(format!("the module must be named '{}'", p.module_name)),
        );
    }
    for port in &p.ports {
        let dir = match port.direction {
            PortDirection::Input => SignalKind::Input,
            PortDirection::Output => SignalKind::Output,
        };
        let found = d
            .signal(&port.name)
            .map(|i| &d.signals[i])
            .filter(|s| s.kind != SignalKind::Internal);
        match found {
            None => diags.push(
                err(format!("port '{}' missing", port.name), module_pos)
                    .with_note(format!("expected {} {}", port.direction.keyword(), port_text(port.width, &port.name))),
            ),
            Some(s) if s.kind != dir => diags.push(
                err(format!("port '{}' has the wrong direction", port.name), s.pos)
                    .with_note(format!("expected {}", port.direction.keyword())),
            ),
            Some(s) if s.width != port.width => diags.push(
                err(format!("port '{}' is {} bits wide", port.name, s.width), s.pos)
                    .with_note(format!("expected {} bits", port.width)),
            ),
            Some(_) => {}
        }
    }
    for (_, s) in d.ports() {
        if !p.ports.iter().any(|q| q.name == s.name) {
            diags.push(err(format!("unexpected port '{}'", s.name), s.pos).with_note("the interface must match the module declaration exactly"));
        }
    }
    if let Some(oh) = &p.onehot_state {
        match d.signal(&oh.signal) {
            Some(i) if d.signals[i].width != oh.states => diags.push(
                err(
                    format!("state vector '{}' is {} bits wide", oh.signal, d.signals[i].width),
                    d.signals[i].pos,
                )
                .with_note(format!("one-hot encoding of {} states needs {} bits", oh.states, oh.states)),
            ),
            Some(_) => {}
            None => diags.push(err(format!("state vector '{}' missing", oh.signal), module_pos)),
        }
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}

fn port_text(width: u32, name: &str) -> String {
    if width == 1 {
        name.to_string()
    } else {
        format!("[{}:0] {name}", width - 1)
    }
}
