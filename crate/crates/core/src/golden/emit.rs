//! Renders a golden model as a synthesizable SystemVerilog module, used as
//! the reference solution for each problem.

use std::fmt::Write;

use super::model::{FsmModel, ResetKind};
use crate::corpus::{PortDirection, ProblemSpec};

fn range(width: u32) -> String {
    port_range(width, 0)
}

fn port_range(width: u32, lsb: i64) -> String {
    if width == 1 && lsb == 0 {
        String::new()
    } else {
        format!("[{}:{lsb}] ", lsb + i64::from(width) - 1)
    }
}

fn is_true(guard: &str) -> bool {
    matches!(guard.trim(), "1" | "1'b1" | "1'd1")
}

fn state_const(name: &str) -> String {
    format!("S_{name}")
}

/// Emits a priority chain of `if` blocks ending at the first constant-true guard.
fn if_chain(out: &mut String, indent: &str, arms: &[(&str, Vec<String>)]) {
    let mut first = true;
    for (guard, lines) in arms {
        if is_true(guard) && first {
            for l in lines {
                let _ = writeln!(out, "{indent}{l}");
            }
            return;
        }
        if is_true(guard) {
            out.push_str(" else begin\n");
        } else if first {
            let _ = writeln!(out, "{indent}if ({guard}) begin");
        } else {
            let _ = writeln!(out, " else if ({guard}) begin");
        }
        for l in lines {
            let _ = writeln!(out, "{indent}    {l}");
        }
        let _ = write!(out, "{indent}end");
        first = false;
        if is_true(guard) {
            break;
        }
    }
    if !first {
        out.push('\n');
    }
}

/// Reference implementation of the problem's golden model.
pub fn to_systemverilog(p: &ProblemSpec) -> String {
    let m: &FsmModel = &p.golden;
    let mut out = String::new();
    let _ = writeln!(out, "module {} (", p.module_name);
    for (i, port) in p.ports.iter().enumerate() {
        let sep = if i + 1 < p.ports.len() { "," } else { "" };
        let kw = match port.direction {
            PortDirection::Input => "input",
            PortDirection::Output => "output logic",
        };
        let _ = writeln!(out, "    {kw} {}{}{sep}", port_range(port.width, port.lsb), port.name);
    }
    let _ = writeln!(out, ");");

    let n = m.states.len() as u32;
    let sw = (32 - (n.max(2) - 1).leading_zeros()).max(1);
    let clocked = m.clock.is_some();

    if clocked {
        let consts: Vec<String> = m
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{} = {sw}'d{i}", state_const(s)))
            .collect();
        let _ = writeln!(out, "    localparam {};", consts.join(", "));
        let _ = writeln!(out, "    logic {}state, state_next;", range(sw));
        for r in &m.registers {
            let _ = writeln!(out, "    logic {}{}, {}_next;", range(r.width), r.name, r.name);
        }
        out.push('\n');

        let clk = m.clock.as_deref().unwrap_or("clk");
        let reset = m.reset_signal.as_deref();
        let (edge, test) = if m.reset_active_high {
            ("posedge", reset.map(|r| r.to_string()))
        } else {
            ("negedge", reset.map(|r| format!("!{r}")))
        };
        match (m.reset_kind, reset) {
            (ResetKind::Asynchronous, Some(r)) => {
                let _ = writeln!(out, "    always_ff @(posedge {clk}, {edge} {r}) begin");
            }
            _ => {
                let _ = writeln!(out, "    always_ff @(posedge {clk}) begin");
            }
        }
        let advance: Vec<String> = std::iter::once("state <= state_next;".to_string())
            .chain(m.registers.iter().map(|r| format!("{0} <= {0}_next;", r.name)))
            .collect();
        match (m.reset_kind, test) {
            (ResetKind::None, _) | (_, None) => {
                for l in &advance {
                    let _ = writeln!(out, "        {l}");
                }
            }
            (_, Some(t)) => {
                let _ = writeln!(out, "        if ({t}) begin");
                let _ = writeln!(out, "            state <= {};", state_const(&m.reset_state));
                for r in &m.registers {
                    let _ = writeln!(out, "            {} <= {}'d{};", r.name, r.width, r.reset);
                }
                let _ = writeln!(out, "        end else begin");
                for l in &advance {
                    let _ = writeln!(out, "            {l}");
                }
                let _ = writeln!(out, "        end");
            }
        }
        let _ = writeln!(out, "    end\n");

        let _ = writeln!(out, "    always_comb begin");
        let _ = writeln!(out, "        state_next = state;");
        for r in &m.registers {
            let _ = writeln!(out, "        {0}_next = {0};", r.name);
        }
        let _ = writeln!(out, "        case (state)");
        for s in &m.states {
            let _ = writeln!(out, "            {}: begin", state_const(s));
            let arms: Vec<(&str, Vec<String>)> = m.transitions[s]
                .iter()
                .map(|t| {
                    let mut lines = vec![format!("state_next = {};", state_const(&t.next))];
                    for (reg, e) in &t.updates {
                        lines.push(format!("{reg}_next = {e};"));
                    }
                    (t.guard.as_str(), lines)
                })
                .collect();
            if_chain(&mut out, "                ", &arms);
            let _ = writeln!(out, "            end");
        }
        if (1u64 << sw) > u64::from(n) {
            let _ = writeln!(out, "            default: state_next = {};", state_const(&m.reset_state));
        }
        let _ = writeln!(out, "        endcase");
        let _ = writeln!(out, "    end\n");
    }

    let _ = writeln!(out, "    always_comb begin");
    let output_lines = |state: &str, indent: &str, out: &mut String| {
        for o in &m.outputs {
            let _ = writeln!(out, "{indent}{} = {};", o.name, m.moore_outputs[state][&o.name]);
        }
        let arms: Vec<(&str, Vec<String>)> = m
            .mealy_rules
            .iter()
            .filter(|r| r.state == state)
            .map(|r| {
                (
                    r.guard.as_str(),
                    r.outputs.iter().map(|(k, v)| format!("{k} = {v};")).collect(),
                )
            })
            .collect();
        if !arms.is_empty() {
            if_chain(out, indent, &arms);
        }
    };
    if clocked {
        let _ = writeln!(out, "        case (state)");
        for s in &m.states {
            let _ = writeln!(out, "            {}: begin", state_const(s));
            output_lines(s, "                ", &mut out);
            let _ = writeln!(out, "            end");
        }
        if (1u64 << sw) > u64::from(n) {
            let _ = writeln!(out, "            default: begin");
            for o in &m.outputs {
                let _ = writeln!(out, "                {} = {}'d0;", o.name, o.width);
            }
            let _ = writeln!(out, "            end");
        }
        let _ = writeln!(out, "        endcase");
    } else {
        output_lines(&m.reset_state, "        ", &mut out);
    }
    let _ = writeln!(out, "    end");
    let _ = writeln!(out, "endmodule");
    out
}
