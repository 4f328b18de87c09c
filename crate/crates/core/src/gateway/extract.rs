use serde::{Deserialize, Serialize};

use super::{ChatMessage, GatewayError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtractionMethod {
    /// Last fence tagged `systemverilog`, `verilog` or `sv`.
    TaggedFence,
    /// Last fence whose body contains the token `module`.
    ModuleFence,
    /// Bare `module ... endmodule` span in the prose.
    BareModule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extracted {
    pub code: String,
    pub method: ExtractionMethod,
}

struct Fence {
    lang: String,
    body: String,
}

fn fences(text: &str) -> Vec<Fence> {
    let mut out = Vec::new();
    let mut open: Option<(String, Vec<&str>)> = None;
    for line in text.lines() {
        let t = line.trim();
        match &mut open {
            None => {
                if let Some(rest) = t.strip_prefix("```") {
                    open = Some((rest.trim().to_ascii_lowercase(), Vec::new()));
                }
            }
            Some((lang, body)) => {
                if t == "```" {
                    out.push(Fence {
                        lang: std::mem::take(lang),
                        body: body.join("\n"),
                    });
                    open = None;
                } else {
                    body.push(line);
                }
            }
        }
    }
    // A reply cut off inside a fence still yields its partial block.
    if let Some((lang, body)) = open {
        out.push(Fence {
            lang,
            body: body.join("\n"),
        });
    }
    out
}

fn word_positions<'a>(text: &'a str, word: &'a str) -> impl Iterator<Item = usize> + 'a {
    let is_ident = |c: char| c.is_ascii_alphanumeric() || c == '_' || c == '$';
    text.match_indices(word).map(|(i, _)| i).filter(move |&i| {
        let before = text[..i].chars().next_back().is_none_or(|c| !is_ident(c));
        let after = text[i + word.len()..].chars().next().is_none_or(|c| !is_ident(c));
        before && after
    })
}

fn normalize(code: &str) -> String {
    format!("{}\n", code.trim_end())
}

/// Pulls the candidate module out of an assistant reply.
pub fn extract_code(m: &ChatMessage) -> Result<Extracted, GatewayError> {
    let blocks = fences(&m.content);
    let tagged = blocks
        .iter()
        .rev()
        .find(|f| matches!(f.lang.as_str(), "systemverilog" | "verilog" | "sv"));
    if let Some(f) = tagged {
        return Ok(Extracted {
            code: normalize(&f.body),
            method: ExtractionMethod::TaggedFence,
        });
    }
    if let Some(f) = blocks.iter().rev().find(|f| word_positions(&f.body, "module").next().is_some()) {
        return Ok(Extracted {
            code: normalize(&f.body),
            method: ExtractionMethod::ModuleFence,
        });
    }
    let text = &m.content;
    if let Some(start) = word_positions(text, "module").next() {
        if let Some(end) = word_positions(text, "endmodule").find(|&e| e > start) {
            return Ok(Extracted {
                code: normalize(&text[start..end + "endmodule".len()]),
                method: ExtractionMethod::BareModule,
            });
        }
    }
    Err(GatewayError::ExtractionFailure)
}
