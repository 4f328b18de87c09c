use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

/// Stable diagnostic codes. The string forms appear in feedback messages and
/// fixtures, so they never change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiagCode {
    #[serde(rename = "SV-LEX")]
    Lex,
    #[serde(rename = "SV-SYNTAX")]
    Syntax,
    #[serde(rename = "SV-BLOCK-DELIM")]
    BlockDelim,
    #[serde(rename = "SV-UNSUPPORTED")]
    Unsupported,
    #[serde(rename = "SV-DECL-ORDER")]
    DeclOrder,
    #[serde(rename = "SV-UNDECLARED")]
    Undeclared,
    #[serde(rename = "SV-REDECLARED")]
    Redeclared,
    #[serde(rename = "SV-WIDTH")]
    Width,
    #[serde(rename = "SV-ENUM")]
    Enum,
    #[serde(rename = "SV-CONST")]
    Const,
    #[serde(rename = "SV-TARGET")]
    Target,
    #[serde(rename = "SV-CLOCK")]
    Clock,
    #[serde(rename = "SV-MULTIDRIVER")]
    MultiDriver,
    #[serde(rename = "SV-INTERFACE")]
    Interface,
}

impl DiagCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagCode::Lex => "SV-LEX",
            DiagCode::Syntax => "SV-SYNTAX",
            DiagCode::BlockDelim => "SV-BLOCK-DELIM",
            DiagCode::Unsupported => "SV-UNSUPPORTED",
            DiagCode::DeclOrder => "SV-DECL-ORDER",
            DiagCode::Undeclared => "SV-UNDECLARED",
            DiagCode::Redeclared => "SV-REDECLARED",
            DiagCode::Width => "SV-WIDTH",
            DiagCode::Enum => "SV-ENUM",
            DiagCode::Const => "SV-CONST",
            DiagCode::Target => "SV-TARGET",
            DiagCode::Clock => "SV-CLOCK",
            DiagCode::MultiDriver => "SV-MULTIDRIVER",
            DiagCode::Interface => "SV-INTERFACE",
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagCode,
    pub message: String,
    /// 1-based; 0 when the diagnostic has no source location.
    pub line: u32,
    pub column: u32,
    pub note: Option<String>,
}

impl Diagnostic {
    pub fn error(code: DiagCode, message: impl Into<String>, line: u32, column: u32) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            line,
            column,
            note: None,
        }
    }

    pub fn warning(code: DiagCode, message: impl Into<String>, line: u32, column: u32) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Self::error(code, message, line, column)
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

pub fn has_errors(ds: &[Diagnostic]) -> bool {
    ds.iter().any(Diagnostic::is_error)
}

/// Renders diagnostics in the compiler-style text that is fed back to the
/// model verbatim. Ordered by (line, column, code); one block per diagnostic.
pub fn format_diagnostics(ds: &[Diagnostic], source: &str) -> String {
    let mut sorted: Vec<&Diagnostic> = ds.iter().collect();
    sorted.sort_by(|a, b| {
        (a.line, a.column, a.code, &a.message).cmp(&(b.line, b.column, b.code, &b.message))
    });
    let lines: Vec<&str> = source.lines().collect();
    let mut out = String::new();
    for (i, d) in sorted.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let sev = match d.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        out.push_str(&format!("{sev}[{}]: {}\n", d.code, d.message));
        if d.line >= 1 {
            out.push_str(&format!("  --> line {}, column {}\n", d.line, d.column));
            if let Some(text) = lines.get(d.line as usize - 1) {
                let text = text.trim_end();
                let gutter = d.line.to_string();
                let pad = " ".repeat(gutter.len());
                out.push_str(&format!("{pad} |\n{gutter} | {text}\n"));
                // Tabs are kept so the caret lines up under the same glyphs.
                let lead: String = text
                    .chars()
                    .take(d.column.saturating_sub(1) as usize)
                    .map(|c| if c == '\t' { '\t' } else { ' ' })
                    .collect();
                out.push_str(&format!("{pad} | {lead}^\n"));
            }
        }
        if let Some(note) = &d.note {
            out.push_str(&format!("  = note: {note}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_list_formats_to_empty_string() {
        assert_eq!(format_diagnostics(&[], "module m; endmodule"), "");
    }

    #[test]
    fn caret_points_at_column() {
        let src = "module m(\n  input a\n);\n  assign q = a;\nendmodule\n";
        let d = Diagnostic::error(DiagCode::Undeclared, "'q' is not declared", 4, 10)
            .with_note("declare it with `logic q;` before use");
        let text = format_diagnostics(&[d], src);
        assert_eq!(
            text,
            "error[SV-UNDECLARED]: 'q' is not declared\n  --> line 4, column 10\n  |\n4 |   assign q = a;\n  |          ^\n  = note: declare it with `logic q;` before use\n"
        );
    }

    #[test]
    fn same_line_orders_by_column() {
        let src = "a b c\n";
        let ds = vec![
            Diagnostic::error(DiagCode::Syntax, "second", 1, 5),
            Diagnostic::error(DiagCode::Syntax, "first", 1, 3),
        ];
        let text = format_diagnostics(&ds, src);
        let first = text.find("first").unwrap();
        let second = text.find("second").unwrap();
        assert!(first < second);
    }
}
