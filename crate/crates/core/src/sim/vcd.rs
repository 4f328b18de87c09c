//! Value-change-dump text for inspecting traces in a waveform viewer.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::Trace;
use crate::logic::LogicVec;

fn ident(i: usize) -> String {
    let mut n = i;
    let mut s = String::new();
    loop {
        s.push((b'!' + (n % 94) as u8) as char);
        n /= 94;
        if n == 0 {
            return s;
        }
        n -= 1;
    }
}

fn value_text(v: &LogicVec, id: &str) -> String {
    if v.width() == 1 {
        format!("{}{id}", v.to_bin_string())
    } else {
        format!("b{} {id}", v.to_bin_string())
    }
}

/// Renders one time step per snapshot; only changed values are dumped.
pub fn to_vcd(module: &str, trace: &Trace) -> String {
    let mut out = String::new();
    let Some(first) = trace.snapshots.first() else {
        return out;
    };
    let names: Vec<(&str, &String, u32)> = [("inputs", &first.inputs), ("outputs", &first.outputs), ("registers", &first.registers)]
        .into_iter()
        .flat_map(|(group, m)| m.iter().map(move |(k, v)| (group, k, v.width())))
        .collect();
    let _ = writeln!(out, "$timescale 1ns $end");
    let _ = writeln!(out, "$scope module {module} $end");
    for (i, (_, name, width)) in names.iter().enumerate() {
        let _ = writeln!(out, "$var wire {width} {} {name} $end", ident(i));
    }
    let _ = writeln!(out, "$upscope $end");
    let _ = writeln!(out, "$enddefinitions $end");
    let mut last: BTreeMap<usize, LogicVec> = BTreeMap::new();
    for (t, snap) in trace.snapshots.iter().enumerate() {
        let _ = writeln!(out, "#{t}");
        for (i, (group, name, _)) in names.iter().enumerate() {
            let map = match *group {
                "inputs" => &snap.inputs,
                "outputs" => &snap.outputs,
                _ => &snap.registers,
            };
            if let Some(v) = map.get(*name) {
                if last.get(&i) != Some(v) {
                    let _ = writeln!(out, "{}", value_text(v, &ident(i)));
                    last.insert(i, *v);
                }
            }
        }
    }
    out
}
