//! Tokenizer for the supported SystemVerilog subset.

use serde::{Deserialize, Serialize};

use super::diag::{DiagCode, Diagnostic};
use crate::logic::{BitVal, LogicVec, MAX_WIDTH};

/// Sources larger than this are rejected before tokenizing.
pub const MAX_SOURCE_BYTES: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenKind {
    Ident,
    Keyword,
    Literal,
    Op,
    Punct,
    Comment,
    /// `$display` and friends.
    SystemIdent,
    /// `` `define `` and other compiler directives, up to end of line.
    Directive,
    Str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line.
    pub line: u32,
    /// 1-based byte column within the line.
    pub column: u32,
    /// Byte offset into the source.
    pub offset: usize,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_trivia(&self) -> bool {
        self.kind == TokenKind::Comment
    }
}

pub const KEYWORDS: &[&str] = &[
    "module", "endmodule", "input", "output", "inout", "logic", "reg", "wire", "bit", "int",
    "integer", "signed", "unsigned", "parameter", "localparam", "typedef", "enum", "assign",
    "always", "always_ff", "always_comb", "always_latch", "posedge", "negedge", "or", "begin",
    "end", "if", "else", "case", "casez", "casex", "endcase", "default", "unique", "unique0",
    "priority", "initial", "final", "generate", "endgenerate", "genvar", "function",
    "endfunction", "task", "endtask", "for", "while", "repeat", "forever", "do", "interface",
    "endinterface", "struct", "packed", "automatic", "return", "disable", "assert", "property",
    "specify", "endspecify",
];

const OPERATORS: &[&str] = &[
    "<<<=", ">>>=", "<<<", ">>>", "===", "!==", "<<=", ">>=", "<<", ">>", "<=", ">=", "==", "!=",
    "&&", "||", "~&", "~|", "~^", "^~", "+:", "-:", "->", "::", "++", "--", "+=", "-=", "*=",
    "/=", "|=", "&=", "^=", "**", "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "=",
    "?", ":", ".", "@", "#", "'",
];

const PUNCT: &[char] = &['(', ')', '[', ']', '{', '}', ',', ';'];

/// Decoded numeric literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiteralValue {
    pub width: u32,
    /// False for plain decimals and unsized based literals (32 bits).
    pub sized: bool,
    pub value: LogicVec,
    /// Bits written as `z` or `?`; wildcards inside `casez` labels.
    pub wildcard: u64,
    /// `'0`, `'1`, `'x`, `'z`: replicated to the width of the context.
    pub fill: Option<BitVal>,
}

/// Parses the text of a literal token.
pub fn decode_literal(text: &str) -> Result<LiteralValue, String> {
    let t = text.replace('_', "");
    if let Some(rest) = t.strip_prefix('\'') {
        if rest.len() == 1 {
            let fill = match rest {
                "0" => BitVal::Zero,
                "1" => BitVal::One,
                "x" | "X" | "z" | "Z" => BitVal::X,
                _ => return decode_based(32, false, rest),
            };
            let value = match fill {
                BitVal::Zero => LogicVec::zero(1),
                BitVal::One => LogicVec::from_u64(1, 1),
                BitVal::X => LogicVec::all_x(1),
            };
            let wildcard = matches!(rest, "z" | "Z") as u64;
            return Ok(LiteralValue {
                width: 1,
                sized: false,
                value,
                wildcard,
                fill: Some(fill),
            });
        }
        return decode_based(32, false, rest);
    }
    if let Some(idx) = t.find('\'') {
        let width: u32 = t[..idx]
            .parse()
            .map_err(|_| format!("invalid literal size in '{text}'"))?;
        if width == 0 {
            return Err(format!("literal '{text}' has zero width"));
        }
        if width > MAX_WIDTH {
            return Err(format!("literal '{text}' is wider than {MAX_WIDTH} bits"));
        }
        return decode_based(width, true, &t[idx + 1..]);
    }
    let v: u64 = t
        .parse()
        .map_err(|_| format!("invalid decimal literal '{text}'"))?;
    if v > u32::MAX as u64 {
        return Err(format!("unsized literal '{text}' does not fit in 32 bits"));
    }
    Ok(LiteralValue {
        width: 32,
        sized: false,
        value: LogicVec::from_u64(32, v),
        wildcard: 0,
        fill: None,
    })
}

fn decode_based(width: u32, sized: bool, spec: &str) -> Result<LiteralValue, String> {
    let spec = spec.strip_prefix(['s', 'S']).unwrap_or(spec);
    let mut chars = spec.chars();
    let base = chars
        .next()
        .ok_or_else(|| "missing literal base".to_string())?
        .to_ascii_lowercase();
    let digits: Vec<char> = chars.collect();
    if digits.is_empty() {
        return Err("literal has no digits".into());
    }
    let bits_per = match base {
        'b' => 1,
        'o' => 3,
        'h' => 4,
        'd' => 0,
        other => return Err(format!("invalid literal base '{other}'")),
    };
    let (mut bits, mut xmask, mut wild) = (0u128, 0u128, 0u128);
    if bits_per == 0 {
        if digits.len() == 1 && matches!(digits[0], 'x' | 'X' | 'z' | 'Z' | '?') {
            let all = u128::MAX;
            xmask = all;
            if digits[0] != 'x' && digits[0] != 'X' {
                wild = all;
            }
        } else {
            let s: String = digits.iter().collect();
            bits = s
                .parse::<u64>()
                .map_err(|_| format!("invalid decimal digits '{s}'"))? as u128;
        }
    } else {
        let full = (1u128 << bits_per) - 1;
        for c in &digits {
            bits <<= bits_per;
            xmask <<= bits_per;
            wild <<= bits_per;
            match c {
                'x' | 'X' => xmask |= full,
                'z' | 'Z' | '?' => {
                    xmask |= full;
                    wild |= full;
                }
                _ => {
                    let d = c
                        .to_digit(1 << bits_per)
                        .ok_or_else(|| format!("invalid digit '{c}' for base '{base}'"))?;
                    bits |= d as u128;
                }
            }
            if bits >> 64 != 0 && !sized {
                return Err("literal too wide".into());
            }
        }
        // An unknown leading digit extends through the full width.
        if let Some(first) = digits.first() {
            if matches!(first, 'x' | 'X' | 'z' | 'Z' | '?') {
                let used = bits_per * digits.len() as u32;
                if used < width {
                    let ext = ((1u128 << (width - used)) - 1) << used;
                    xmask |= ext;
                    if !matches!(first, 'x' | 'X') {
                        wild |= ext;
                    }
                }
            }
        }
    }
    let m = if width >= 64 { u64::MAX } else { (1u64 << width) - 1 };
    Ok(LiteralValue {
        width,
        sized,
        value: LogicVec::new(width, bits as u64, xmask as u64),
        wildcard: (wild as u64) & m,
        fill: None,
    })
}

/// Tokenizes `source`. Comments are kept as trivia tokens. Lexing continues
/// past bad characters so that all of them are reported.
pub fn lex(source: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    if source.len() > MAX_SOURCE_BYTES {
        return Err(vec![Diagnostic::error(
            DiagCode::Lex,
            format!(
                "source is {} bytes, exceeding the {} byte limit",
                source.len(),
                MAX_SOURCE_BYTES
            ),
            1,
            1,
        )]);
    }
    let mut lx = Lexer {
        src: source.as_bytes(),
        text: source,
        pos: 0,
        line: 1,
        line_start: 0,
        tokens: Vec::new(),
        diags: Vec::new(),
    };
    lx.run();
    if lx.diags.is_empty() {
        Ok(lx.tokens)
    } else {
        Err(lx.diags)
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    line: u32,
    line_start: usize,
    tokens: Vec<Token>,
    diags: Vec<Diagnostic>,
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'$'
}

impl<'a> Lexer<'a> {
    fn peek(&self, off: usize) -> Option<u8> {
        self.src.get(self.pos + off).copied()
    }

    fn column_of(&self, offset: usize) -> u32 {
        (offset - self.line_start + 1) as u32
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: u32, column: u32) {
        self.tokens.push(Token {
            kind,
            text: self.text[start..self.pos].to_string(),
            line,
            column,
            offset: start,
        });
    }

    fn error(&mut self, msg: impl Into<String>, line: u32, column: u32) {
        self.diags
            .push(Diagnostic::error(DiagCode::Lex, msg, line, column));
    }

    /// Advances over `n` bytes, tracking newlines.
    fn bump(&mut self, n: usize) {
        for _ in 0..n {
            if self.pos >= self.src.len() {
                return;
            }
            if self.src[self.pos] == b'\n' {
                self.line += 1;
                self.line_start = self.pos + 1;
            }
            self.pos += 1;
        }
    }

    fn run(&mut self) {
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let start = self.pos;
            let (line, column) = (self.line, self.column_of(start));
            if c.is_ascii_whitespace() {
                self.bump(1);
                continue;
            }
            if c == b'/' && self.peek(1) == Some(b'/') {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.pos += 1;
                }
                self.push(TokenKind::Comment, start, line, column);
                continue;
            }
            if c == b'/' && self.peek(1) == Some(b'*') {
                self.bump(2);
                let mut closed = false;
                while self.pos < self.src.len() {
                    if self.src[self.pos] == b'*' && self.peek(1) == Some(b'/') {
                        self.bump(2);
                        closed = true;
                        break;
                    }
                    self.bump(1);
                }
                if !closed {
                    self.error("unterminated block comment", line, column);
                    return;
                }
                self.push(TokenKind::Comment, start, line, column);
                continue;
            }
            if is_ident_start(c) {
                while self.peek(0).is_some_and(is_ident_char) {
                    self.pos += 1;
                }
                let word = &self.text[start..self.pos];
                let kind = if KEYWORDS.contains(&word) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Ident
                };
                self.push(kind, start, line, column);
                continue;
            }
            if c == b'\\' {
                // Escaped identifier: up to whitespace.
                self.pos += 1;
                while self.peek(0).is_some_and(|b| !b.is_ascii_whitespace()) {
                    self.pos += 1;
                }
                self.push(TokenKind::Ident, start, line, column);
                continue;
            }
            if c == b'$' {
                self.pos += 1;
                while self.peek(0).is_some_and(is_ident_char) {
                    self.pos += 1;
                }
                self.push(TokenKind::SystemIdent, start, line, column);
                continue;
            }
            if c == b'`' {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.pos += 1;
                }
                self.push(TokenKind::Directive, start, line, column);
                continue;
            }
            if c == b'"' {
                self.pos += 1;
                let mut closed = false;
                while let Some(b) = self.peek(0) {
                    if b == b'\n' {
                        break;
                    }
                    self.pos += 1;
                    if b == b'\\' {
                        if self.peek(0).is_some_and(|n| n != b'\n') {
                            self.pos += 1;
                        }
                    } else if b == b'"' {
                        closed = true;
                        break;
                    }
                }
                if !closed {
                    self.error("unterminated string literal", line, column);
                    continue;
                }
                self.push(TokenKind::Str, start, line, column);
                continue;
            }
            if c.is_ascii_digit() || (c == b'\'' && self.based_follows(1)) {
                self.lex_number(start, line, column);
                continue;
            }
            if PUNCT.contains(&(c as char)) {
                self.pos += 1;
                self.push(TokenKind::Punct, start, line, column);
                continue;
            }
            if let Some(op) = OPERATORS
                .iter()
                .find(|op| self.src[self.pos..].starts_with(op.as_bytes()))
            {
                self.pos += op.len();
                self.push(TokenKind::Op, start, line, column);
                continue;
            }
            // Skip the whole (possibly multi-byte) character.
            let ch = self.text[start..].chars().next().unwrap_or('\u{fffd}');
            self.pos += ch.len_utf8();
            self.error(format!("unexpected character {ch:?}"), line, column);
        }
    }

    /// Whether the bytes after a `'` at `pos + off - 1` form a based literal
    /// or a fill literal.
    fn based_follows(&self, off: usize) -> bool {
        match self.peek(off) {
            Some(b's' | b'S') => matches!(
                self.peek(off + 1),
                Some(b'b' | b'B' | b'o' | b'O' | b'd' | b'D' | b'h' | b'H')
            ),
            Some(b'b' | b'B' | b'o' | b'O' | b'd' | b'D' | b'h' | b'H') => true,
            Some(b'0' | b'1' | b'x' | b'X' | b'z' | b'Z') => !self
                .peek(off + 1)
                .is_some_and(is_ident_char),
            _ => false,
        }
    }

    fn lex_number(&mut self, start: usize, line: u32, column: u32) {
        while self.peek(0).is_some_and(|b| b.is_ascii_digit() || b == b'_') {
            self.pos += 1;
        }
        if self.peek(0) == Some(b'\'') && self.based_follows(1) {
            self.pos += 1;
            if self.peek(0).is_some_and(|b| b == b's' || b == b'S') {
                self.pos += 1;
            }
            self.pos += 1; // base or fill digit
            while self
                .peek(0)
                .is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'?')
            {
                self.pos += 1;
            }
        }
        let text = &self.text[start..self.pos];
        if let Err(msg) = decode_literal(text) {
            self.error(msg, line, column);
            return;
        }
        self.push(TokenKind::Literal, start, line, column);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        lex(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.text))
            .collect()
    }

    #[test]
    fn sized_literal_is_one_token() {
        let toks = lex("4'b0001").unwrap();
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].kind, TokenKind::Literal);
        let v = decode_literal(&toks[0].text).unwrap();
        assert_eq!(v.width, 4);
        assert_eq!(v.value.to_u64(), Some(1));
        assert!(v.sized);
    }

    #[test]
    fn empty_source_has_no_tokens() {
        assert!(lex("").unwrap().is_empty());
    }

    #[test]
    fn module_header_tokens() {
        assert_eq!(
            kinds("module top_module("),
            vec![
                (TokenKind::Keyword, "module".into()),
                (TokenKind::Ident, "top_module".into()),
                (TokenKind::Punct, "(".into()),
            ]
        );
    }

    #[test]
    fn comments_are_trivia_with_positions() {
        let toks = lex("input areset,    // Freshly brainwashed\n  x").unwrap();
        let c = toks.iter().find(|t| t.is_trivia()).unwrap();
        assert_eq!((c.line, c.column), (1, 18));
        let x = toks.last().unwrap();
        assert_eq!((x.line, x.column, x.text.as_str()), (2, 3, "x"));
    }

    #[test]
    fn literal_forms() {
        let v = decode_literal("8'hF?").unwrap();
        assert_eq!(v.wildcard, 0x0F);
        assert_eq!(v.value.xmask(), 0x0F);
        let v = decode_literal("'1").unwrap();
        assert_eq!(v.fill, Some(BitVal::One));
        let v = decode_literal("2'bx").unwrap();
        assert_eq!(v.value.xmask(), 0b11);
        let v = decode_literal("3'd5").unwrap();
        assert_eq!(v.value.to_u64(), Some(5));
        assert_eq!(decode_literal("12").unwrap().width, 32);
        assert!(decode_literal("4'b2").is_err());
    }

    #[test]
    fn operators_longest_match() {
        let k = kinds("a <= b; c == d ~^ e");
        let ops: Vec<&str> = k
            .iter()
            .filter(|(k, _)| *k == TokenKind::Op)
            .map(|(_, t)| t.as_str())
            .collect();
        assert_eq!(ops, vec!["<=", "==", "~^"]);
    }

    #[test]
    fn errors_have_positions() {
        let err = lex("a\n  /* open").unwrap_err();
        assert_eq!((err[0].line, err[0].column), (2, 3));
        let err = lex("a £ b").unwrap_err();
        assert_eq!(err[0].code, DiagCode::Lex);
        assert_eq!(err[0].column, 3);
    }

    #[test]
    fn oversized_source_rejected() {
        let big = " ".repeat(MAX_SOURCE_BYTES + 1);
        assert!(lex(&big).is_err());
    }
}
