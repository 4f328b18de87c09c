//! Markdown prompt construction: the systematic problem prompt, To-do
//! patches appended to its end, and multi-stage chain-of-thought plans.

use std::fmt::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{render_waveform, PortDirection, ProblemSpec};

pub const PREAMBLE: &str =
    "Act as a professional SystemVerilog programmer. You are going to design a module based on the specifications.";
pub const CLOSING: &str = "Implement the state machine described above as a complete SystemVerilog module.";

pub const SPECIFICATION: &str = "Specification";
pub const EXAMPLE_BEHAVIOR: &str = "Example Behavior";
pub const MODULE_DECLARATION: &str = "Module Declaration";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("a patch is already applied to this prompt")]
    PatchAlreadyApplied,
    #[error("unknown patch '{0}'")]
    UnknownPatch(String),
    #[error("invalid patch: {0}")]
    InvalidPatch(String),
    #[error("cannot read patch {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub heading: String,
    pub body: String,
}

/// A To-do list appended after every other section.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopPatch {
    pub id: String,
    pub todo_items: Vec<String>,
}

impl TopPatch {
    pub fn new(id: impl Into<String>, todo_items: Vec<String>) -> Result<Self, PromptError> {
        let p = TopPatch {
            id: id.into(),
            todo_items,
        };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<(), PromptError> {
        if self.id.trim().is_empty() {
            return Err(PromptError::InvalidPatch("patch id is empty".into()));
        }
        if self.todo_items.is_empty() {
            return Err(PromptError::InvalidPatch(format!("patch '{}' has no to-do items", self.id)));
        }
        if self.todo_items.iter().any(|i| i.trim().is_empty()) {
            return Err(PromptError::InvalidPatch(format!("patch '{}' has an empty to-do item", self.id)));
        }
        Ok(())
    }

    /// The `### To-do` heading and numbered list.
    pub fn render(&self) -> String {
        let mut out = String::from("### To-do\n\n");
        for (i, item) in self.todo_items.iter().enumerate() {
            let _ = writeln!(out, "{}. {}", i + 1, item.trim());
        }
        out
    }

    pub fn builtin(id: &str) -> Result<TopPatch, PromptError> {
        builtin_patches()
            .into_iter()
            .find(|p| p.id == id)
            .ok_or_else(|| PromptError::UnknownPatch(id.to_string()))
    }

    /// Reads a `{id, todo_items}` JSON document.
    pub fn load(path: &Path) -> Result<TopPatch, PromptError> {
        let text = std::fs::read_to_string(path).map_err(|e| PromptError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let p: TopPatch = serde_json::from_str(&text).map_err(|e| PromptError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        p.check()?;
        Ok(p)
    }

    /// A built-in id, or else a path to a patch file.
    pub fn resolve(spec: &str) -> Result<TopPatch, PromptError> {
        match TopPatch::builtin(spec) {
            Ok(p) => Ok(p),
            Err(e) if Path::new(spec).is_file() => TopPatch::load(Path::new(spec)).map_err(|_| e),
            Err(e) => Err(e),
        }
    }
}

pub const SYNC_RESET: &str = "sync-reset";
pub const ONE_HOT: &str = "one-hot";
pub const COT_MULTISHOT: &str = "cot-multishot";

pub fn builtin_patches() -> Vec<TopPatch> {
    let patch = |id: &str, items: [&str; 3]| TopPatch {
        id: id.into(),
        todo_items: items.iter().map(|s| s.to_string()).collect(),
    };
    vec![
        patch(
            SYNC_RESET,
            [
                "Explain synchronous reset and give a basic example.",
                "Tell the difference between synchronous and asynchronous reset design in SystemVerilog implementation.",
                "Implement the above design specifications in SystemVerilog.",
            ],
        ),
        patch(
            ONE_HOT,
            [
                "Explain \"derive equations by inspection\".",
                "List out every situation that will result in each next_state.",
                "Implement the entire SystemVerilog module for the state machine using the above two results.",
            ],
        ),
        patch(
            COT_MULTISHOT,
            [
                "Read the example behavior first carefully. Elaborate the reasoning behind these behaviors.",
                "design a FSM for the above specification. Give the state transition table with the outputs details that contains every input condition for each state.",
                "implement the entire SystemVerilog module for the state machine.",
            ],
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptDocument {
    pub preamble: String,
    pub sections: Vec<Section>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<TopPatch>,
}

impl PromptDocument {
    pub fn section(&self, heading: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.heading == heading)
    }

    pub fn render(&self) -> String {
        render(self)
    }
}

/// Markdown pipe table for a problem's golden machine. Purely combinational
/// problems have no control state, so the first table in their text is used.
pub fn transition_table_markdown(p: &ProblemSpec) -> String {
    let m = &p.golden;
    if m.clock.is_none() {
        return p
            .spec_markdown
            .lines()
            .skip_while(|l| !l.trim_start().starts_with('|'))
            .take_while(|l| l.trim_start().starts_with('|'))
            .map(|l| format!("{}\n", l.trim()))
            .collect();
    }
    let has_updates = !m.registers.is_empty();
    let mut out = String::from("| State | Condition | Next state |");
    if has_updates {
        out.push_str(" Register updates |");
    }
    for o in &m.outputs {
        let _ = write!(out, " {} |", o.name);
    }
    out.push_str("\n|---|---|---|");
    if has_updates {
        out.push_str("---|");
    }
    out.push_str(&"---|".repeat(m.outputs.len()));
    out.push('\n');
    for s in &m.states {
        let rules = &m.transitions[s];
        for (i, t) in rules.iter().enumerate() {
            let cond = match t.guard.trim() {
                "1" | "1'b1" if rules.len() == 1 => "any".to_string(),
                "1" | "1'b1" => "otherwise".to_string(),
                g if i == 0 => format!("`{g}`"),
                g => format!("else `{g}`"),
            };
            let _ = write!(out, "| {s} | {cond} | {} |", t.next);
            if has_updates {
                let ups: Vec<String> = t.updates.iter().map(|(r, e)| format!("{r} = {e}")).collect();
                let _ = write!(out, " {} |", if ups.is_empty() { "-".to_string() } else { format!("`{}`", ups.join("; ")) });
            }
            for o in &m.outputs {
                let _ = write!(out, " {} |", m.moore_outputs[s][&o.name]);
            }
            out.push('\n');
        }
    }
    out
}

fn module_declaration(p: &ProblemSpec) -> String {
    let mut out = String::from("```systemverilog\n");
    let _ = writeln!(out, "module {}(", p.module_name);
    for (i, port) in p.ports.iter().enumerate() {
        let kw = match port.direction {
            PortDirection::Input => "input",
            PortDirection::Output => "output logic",
        };
        let range = if port.width == 1 && port.lsb == 0 {
            String::new()
        } else {
            format!("[{}:{}] ", port.lsb + i64::from(port.width) - 1, port.lsb)
        };
        let sep = if i + 1 < p.ports.len() { "," } else { "" };
        let _ = write!(out, "    {kw} {range}{}{sep}", port.name);
        if let Some(c) = &port.comment {
            let _ = write!(out, "    // {c}");
        }
        out.push('\n');
    }
    out.push_str(");\n...\nendmodule\n```");
    out
}

/// The systematic markdown prompt. `context` is the predecessor problem whose
/// transition table is supplied as extra information.
pub fn build_systematic_prompt(p: &ProblemSpec, context: Option<&ProblemSpec>) -> PromptDocument {
    let mut spec = p.spec_markdown.trim().to_string();
    if let Some(prev) = context {
        let _ = write!(
            spec,
            "\n\nThe correct state transition table from the previous problem ({}):\n\n{}",
            prev.title,
            transition_table_markdown(prev).trim_end()
        );
    }
    let mut sections = vec![Section {
        heading: SPECIFICATION.into(),
        body: spec,
    }];
    if let Some(w) = &p.waveform {
        sections.push(Section {
            heading: EXAMPLE_BEHAVIOR.into(),
            body: render_waveform(w).trim_end().to_string(),
        });
    }
    sections.push(Section {
        heading: MODULE_DECLARATION.into(),
        body: format!("{}\n\n{CLOSING}", module_declaration(p)),
    });
    PromptDocument {
        preamble: PREAMBLE.into(),
        sections,
        patch: None,
    }
}

pub fn apply_top_patch(d: &PromptDocument, patch: &TopPatch) -> Result<PromptDocument, PromptError> {
    if d.patch.is_some() {
        return Err(PromptError::PatchAlreadyApplied);
    }
    patch.check()?;
    Ok(PromptDocument {
        patch: Some(patch.clone()),
        ..d.clone()
    })
}

/// Deterministic markdown: sections separated by one blank line, the patch last.
pub fn render(d: &PromptDocument) -> String {
    let mut out = format!("{}\n", d.preamble.trim());
    for s in &d.sections {
        let _ = write!(out, "\n### {}\n\n{}\n", s.heading, s.body.trim());
    }
    if let Some(p) = &d.patch {
        out.push('\n');
        out.push_str(&p.render());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionPolicy {
    SingleSession,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub instruction: String,
    pub expects_code: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StagePlan {
    pub stages: Vec<Stage>,
    pub session_policy: SessionPolicy,
}

impl StagePlan {
    /// User messages in order: the first carries the full prompt.
    pub fn messages(&self, d: &PromptDocument) -> Vec<String> {
        self.stages
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if i == 0 {
                    format!("{}\n{}", render(d), s.instruction)
                } else {
                    s.instruction.clone()
                }
            })
            .collect()
    }
}

/// Three stages in one session, one To-do item each; only the last asks for code.
pub fn build_multishot_plan(_p: &ProblemSpec) -> StagePlan {
    let cot = TopPatch::builtin(COT_MULTISHOT).expect("built-in patch");
    let n = cot.todo_items.len();
    let stages = cot
        .todo_items
        .iter()
        .enumerate()
        .map(|(i, item)| Stage {
            instruction: format!("### To-do\n\n{}. {item}\n", i + 1),
            expects_code: i + 1 == n,
        })
        .collect();
    StagePlan {
        stages,
        session_policy: SessionPolicy::SingleSession,
    }
}

#[cfg(test)]
mod tests;
