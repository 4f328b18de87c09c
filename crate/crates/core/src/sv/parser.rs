//! Recursive-descent parser producing a [`ModuleAst`].
//!
//! The parser recovers at statement and item boundaries so a single pass
//! reports every independent error. Constructs outside the supported subset
//! produce `SV-UNSUPPORTED` rather than syntax errors.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::diag::{has_errors, DiagCode, Diagnostic};
use super::lexer::{lex, Token, TokenKind};

const MAX_NESTING: u32 = 200;

/// Successful parse: the module plus any warnings.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub module: ModuleAst,
    pub warnings: Vec<Diagnostic>,
}

/// Lexes and parses `source` in one go.
pub fn parse_source(source: &str) -> Result<Parsed, Vec<Diagnostic>> {
    let tokens = lex(source)?;
    parse_module(&tokens)
}

pub fn parse_module(tokens: &[Token]) -> Result<Parsed, Vec<Diagnostic>> {
    let mut p = Parser::new(tokens);
    let module = p.source();
    let diags = p.diags;
    match module {
        Some(m) if !has_errors(&diags) => Ok(Parsed {
            module: m,
            warnings: diags,
        }),
        _ => {
            if !has_errors(&diags) {
                // Defensive: a failed parse always explains itself.
                let mut diags = diags;
                diags.push(Diagnostic::error(DiagCode::Syntax, "no module found", 1, 1));
                return Err(diags);
            }
            Err(diags)
        }
    }
}

/// Parses a standalone expression (used for guard strings in golden models).
pub fn parse_expression(source: &str) -> Result<Expr, Vec<Diagnostic>> {
    let tokens = lex(source)?;
    let mut p = Parser::new(&tokens);
    let e = p.expr();
    if let Ok(e) = e {
        if p.at_eof() && !has_errors(&p.diags) {
            return Ok(e);
        }
        if !p.at_eof() {
            let t = p.peek_tok().cloned();
            p.error_at_tok(t.as_ref(), DiagCode::Syntax, "unexpected text after expression");
        }
    }
    Err(p.diags)
}

#[derive(Debug)]
struct Fail;

type PResult<T> = Result<T, Fail>;

struct Parser<'t> {
    toks: Vec<&'t Token>,
    /// Same-line comment following the significant token at this index.
    trailing: HashMap<usize, String>,
    pos: usize,
    diags: Vec<Diagnostic>,
    depth: u32,
    typedefs: HashSet<String>,
    /// First use of each name inside a process or continuous assignment.
    first_use: HashMap<String, Pos>,
    declared: HashSet<String>,
    in_process: bool,
}

const ITEM_KEYWORDS: &[&str] = &[
    "always", "always_ff", "always_comb", "always_latch", "assign", "initial", "final",
    "localparam", "parameter", "typedef", "endmodule", "module", "generate", "function", "task",
];

fn tok_pos(t: &Token) -> Pos {
    Pos::new(t.line, t.column)
}

impl<'t> Parser<'t> {
    fn new(tokens: &'t [Token]) -> Self {
        let mut toks = Vec::new();
        let mut trailing = HashMap::new();
        for t in tokens {
            if t.is_trivia() {
                if let Some(last) = toks.last() {
                    let last: &&Token = last;
                    if last.line == t.line && t.text.starts_with("//") {
                        let text = t.text.trim_start_matches('/').trim().to_string();
                        trailing.entry(toks.len() - 1).or_insert(text);
                    }
                }
            } else {
                toks.push(t);
            }
        }
        Parser {
            toks,
            trailing,
            pos: 0,
            diags: Vec::new(),
            depth: 0,
            typedefs: HashSet::new(),
            first_use: HashMap::new(),
            declared: HashSet::new(),
            in_process: false,
        }
    }

    // ---- token helpers -------------------------------------------------

    fn at_eof(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek_tok(&self) -> Option<&'t Token> {
        self.toks.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<&'t Token> {
        self.toks.get(self.pos + off).copied()
    }

    fn peek_text(&self) -> &str {
        self.peek_tok().map(|t| t.text.as_str()).unwrap_or("")
    }

    fn check(&self, text: &str) -> bool {
        self.peek_tok().is_some_and(|t| {
            t.text == text && !matches!(t.kind, TokenKind::Literal | TokenKind::Str)
        })
    }

    fn check_kw(&self, kw: &str) -> bool {
        self.peek_tok().is_some_and(|t| t.is(TokenKind::Keyword, kw))
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.check(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn current_pos(&self) -> Pos {
        match self.peek_tok() {
            Some(t) => tok_pos(t),
            None => self.eof_pos(),
        }
    }

    fn eof_pos(&self) -> Pos {
        match self.toks.last() {
            Some(t) => Pos::new(t.line, t.column + t.text.len() as u32),
            None => Pos::new(1, 1),
        }
    }

    fn error_at(&mut self, pos: Pos, code: DiagCode, msg: impl Into<String>) -> &mut Diagnostic {
        self.diags
            .push(Diagnostic::error(code, msg, pos.line, pos.column));
        self.diags.last_mut().unwrap()
    }

    fn error_at_tok(&mut self, t: Option<&Token>, code: DiagCode, msg: impl Into<String>) {
        let pos = t.map(tok_pos).unwrap_or_else(|| self.eof_pos());
        self.error_at(pos, code, msg);
    }

    fn describe_current(&self) -> String {
        match self.peek_tok() {
            Some(t) => format!("'{}'", t.text),
            None => "end of input".to_string(),
        }
    }

    fn expect(&mut self, text: &str) -> PResult<()> {
        if self.eat(text) {
            return Ok(());
        }
        let found = self.describe_current();
        let pos = self.current_pos();
        self.error_at(pos, DiagCode::Syntax, format!("expected '{text}', found {found}"));
        Err(Fail)
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek_tok() {
            Some(t) if t.kind == TokenKind::Ident => {
                self.pos += 1;
                Ok((t.text.clone(), tok_pos(t)))
            }
            Some(t) if t.kind == TokenKind::Keyword => {
                let msg = format!("expected {what}, found keyword '{}'", t.text);
                self.error_at(tok_pos(t), DiagCode::Syntax, msg)
                    .note = Some(format!("'{}' is a reserved word and cannot be used as a name", t.text));
                Err(Fail)
            }
            _ => {
                let found = self.describe_current();
                let pos = self.current_pos();
                self.error_at(pos, DiagCode::Syntax, format!("expected {what}, found {found}"));
                Err(Fail)
            }
        }
    }

    fn unsupported(&mut self, pos: Pos, what: &str) {
        self.error_at(pos, DiagCode::Unsupported, format!("unsupported construct: {what}"))
            .note = Some("the evaluation subset covers single-module RTL with always/assign logic".into());
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            let pos = self.current_pos();
            self.error_at(pos, DiagCode::Syntax, "nesting too deep");
            return Err(Fail);
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    /// Skips a balanced group starting at an opening bracket.
    fn skip_balanced(&mut self) {
        let (open, close) = match self.peek_text() {
            "(" => ("(", ")"),
            "[" => ("[", "]"),
            "{" => ("{", "}"),
            _ => return,
        };
        let mut depth = 0usize;
        while let Some(t) = self.peek_tok() {
            self.pos += 1;
            if t.kind == TokenKind::Punct {
                if t.text == open {
                    depth += 1;
                } else if t.text == close {
                    depth -= 1;
                    if depth == 0 {
                        return;
                    }
                }
            }
        }
    }

    /// Skips to just past the next `;` at nesting depth zero, stopping early
    /// at block terminators and module items.
    fn recover_stmt(&mut self) {
        let mut depth = 0i32;
        while let Some(t) = self.peek_tok() {
            let kw = t.kind == TokenKind::Keyword;
            if kw && ITEM_KEYWORDS.contains(&t.text.as_str()) {
                return;
            }
            if depth <= 0 && kw && matches!(t.text.as_str(), "end" | "endcase") {
                return;
            }
            match t.text.as_str() {
                "begin" | "case" | "casez" | "casex" if kw => depth += 1,
                "end" | "endcase" if kw => depth -= 1,
                "(" | "{" | "[" if t.kind == TokenKind::Punct => depth += 1,
                ")" | "}" | "]" if t.kind == TokenKind::Punct => depth -= 1,
                ";" if t.kind == TokenKind::Punct && depth <= 0 => {
                    self.pos += 1;
                    return;
                }
                _ => {}
            }
            self.pos += 1;
        }
    }

    fn recover_item(&mut self) {
        let mut depth = 0i32;
        while let Some(t) = self.peek_tok() {
            if t.kind == TokenKind::Keyword && ITEM_KEYWORDS.contains(&t.text.as_str()) {
                return;
            }
            match t.text.as_str() {
                "(" | "{" | "[" if t.kind == TokenKind::Punct => depth += 1,
                ")" | "}" | "]" if t.kind == TokenKind::Punct => depth -= 1,
                ";" if t.kind == TokenKind::Punct && depth <= 0 => {
                    self.pos += 1;
                    return;
                }
                _ => {}
            }
            self.pos += 1;
        }
    }

    fn skip_to_keyword(&mut self, end_kw: &str) {
        while let Some(t) = self.peek_tok() {
            self.pos += 1;
            if t.is(TokenKind::Keyword, end_kw) {
                return;
            }
            if t.is(TokenKind::Keyword, "endmodule") {
                self.pos -= 1;
                return;
            }
        }
    }

    fn note_use(&mut self, name: &str, pos: Pos) {
        if self.in_process && !self.declared.contains(name) {
            self.first_use.entry(name.to_string()).or_insert(pos);
        }
    }

    fn note_decl(&mut self, name: &str, pos: Pos, module_level: bool) {
        if module_level {
            if let Some(used) = self.first_use.get(name).copied() {
                self.diags.push(
                    Diagnostic::warning(
                        DiagCode::DeclOrder,
                        format!("'{name}' is declared after its first use"),
                        pos.line,
                        pos.column,
                    )
                    .with_note(format!(
                        "first used at line {}, column {}; declarations must precede the logic that uses them",
                        used.line, used.column
                    )),
                );
            }
        }
        self.declared.insert(name.to_string());
    }

    // ---- source / module -----------------------------------------------

    fn source(&mut self) -> Option<ModuleAst> {
        while let Some(t) = self.peek_tok() {
            if t.is(TokenKind::Keyword, "module") {
                break;
            }
            if t.kind == TokenKind::Directive {
                self.directive(t);
                self.pos += 1;
                continue;
            }
            self.error_at_tok(Some(t), DiagCode::Syntax, format!("expected 'module', found '{}'", t.text));
            // Skip ahead to the module keyword.
            while self.peek_tok().is_some_and(|t| !t.is(TokenKind::Keyword, "module")) {
                self.pos += 1;
            }
        }
        if self.at_eof() {
            if !has_errors(&self.diags) {
                let pos = self.eof_pos();
                self.error_at(pos, DiagCode::Syntax, "no module declaration found");
            }
            return None;
        }
        let module = self.module();
        while let Some(t) = self.peek_tok() {
            if t.is(TokenKind::Keyword, "module") {
                self.unsupported(tok_pos(t), "multiple modules / module hierarchy");
                self.skip_to_keyword("endmodule");
            } else if t.kind == TokenKind::Directive {
                self.directive(t);
                self.pos += 1;
            } else {
                self.error_at_tok(Some(t), DiagCode::Syntax, format!("unexpected '{}' after endmodule", t.text));
                self.pos += 1;
            }
        }
        module.ok()
    }

    fn directive(&mut self, t: &Token) {
        let name = t.text.split_whitespace().next().unwrap_or("`");
        if !matches!(name, "`timescale" | "`default_nettype") {
            self.unsupported(tok_pos(t), &format!("compiler directive {name}"));
        }
    }

    fn module(&mut self) -> PResult<ModuleAst> {
        let pos = self.current_pos();
        self.expect("module")?;
        let (name, _) = self.ident("module name")?;
        if self.check("#") {
            let p = self.current_pos();
            self.unsupported(p, "parameterized module header");
            self.pos += 1;
            self.skip_balanced();
        }
        let ports = if self.check("(") {
            self.ports()?
        } else {
            Vec::new()
        };
        for p in &ports {
            self.declared.insert(p.name.clone());
        }
        self.expect(";")?;
        let mut items = Vec::new();
        loop {
            let Some(t) = self.peek_tok() else {
                let pos = self.eof_pos();
                self.error_at(pos, DiagCode::Syntax, "missing 'endmodule'");
                return Err(Fail);
            };
            if t.is(TokenKind::Keyword, "endmodule") {
                self.pos += 1;
                if self.eat(":") {
                    let _ = self.ident("module name");
                }
                break;
            }
            if t.is(TokenKind::Keyword, "module") {
                self.error_at(tok_pos(t), DiagCode::Syntax, "missing 'endmodule' before next module");
                return Err(Fail);
            }
            let start = self.pos;
            match self.item(&mut items) {
                Ok(()) => {}
                Err(Fail) => {
                    self.in_process = false;
                    self.depth = 0;
                    if self.pos == start {
                        self.pos += 1;
                    }
                    self.recover_item();
                }
            }
        }
        Ok(ModuleAst {
            name,
            ports,
            items,
            pos,
        })
    }

    fn ports(&mut self) -> PResult<Vec<AnsiPort>> {
        self.expect("(")?;
        let mut ports: Vec<AnsiPort> = Vec::new();
        if self.eat(")") {
            return Ok(ports);
        }
        loop {
            let start = self.current_pos();
            let direction = match self.peek_text() {
                "input" => Some(Direction::Input),
                "output" => Some(Direction::Output),
                "inout" => {
                    self.unsupported(start, "inout port");
                    Some(Direction::Input)
                }
                _ => None,
            };
            if direction.is_some() {
                self.pos += 1;
            }
            let (direction, mut kind, mut range) = match (direction, ports.last()) {
                (Some(d), _) => (d, NetKind::Implicit, None),
                (None, Some(prev)) => (prev.direction, prev.kind, prev.range.clone()),
                (None, None) => {
                    self.unsupported(start, "non-ANSI port list");
                    while !self.at_eof() && !self.check(")") {
                        self.pos += 1;
                    }
                    self.expect(")")?;
                    return Ok(ports);
                }
            };
            let fresh = matches!(
                self.toks.get(self.pos.wrapping_sub(1)).map(|t| t.text.as_str()),
                Some("input" | "output" | "inout")
            );
            if fresh {
                if let Some(k) = self.net_kind() {
                    kind = k;
                    self.pos += 1;
                }
                if self.check("var") {
                    self.pos += 1;
                }
                if self.check_kw("signed") || self.check_kw("unsigned") {
                    let p = self.current_pos();
                    if self.check_kw("signed") {
                        self.unsupported(p, "signed types");
                    }
                    self.pos += 1;
                }
                range = if self.check("[") {
                    Some(self.range()?)
                } else {
                    None
                };
            } else if self.net_kind().is_some() || self.check("[") {
                // `input a, logic [1:0] b` style: new type without direction
                if let Some(k) = self.net_kind() {
                    kind = k;
                    self.pos += 1;
                }
                range = if self.check("[") {
                    Some(self.range()?)
                } else {
                    None
                };
            }
            let name_idx = self.pos;
            let (name, pos) = self.ident("port name")?;
            if self.check("[") {
                let p = self.current_pos();
                self.unsupported(p, "unpacked array port");
                self.skip_balanced();
            }
            let mut comment = self.trailing.get(&name_idx).cloned();
            let more = self.check(",");
            if more {
                if comment.is_none() {
                    comment = self.trailing.get(&self.pos).cloned();
                }
                self.pos += 1;
            }
            ports.push(AnsiPort {
                direction,
                kind,
                range,
                name,
                comment,
                pos,
            });
            if !more {
                break;
            }
            if self.check(")") {
                // trailing comma
                let p = self.current_pos();
                self.error_at(p, DiagCode::Syntax, "trailing ',' in port list");
                break;
            }
        }
        self.expect(")")?;
        Ok(ports)
    }

    fn net_kind(&self) -> Option<NetKind> {
        let t = self.peek_tok()?;
        if t.kind != TokenKind::Keyword {
            return None;
        }
        Some(match t.text.as_str() {
            "logic" => NetKind::Logic,
            "reg" => NetKind::Reg,
            "wire" => NetKind::Wire,
            "bit" => NetKind::Bit,
            "int" => NetKind::Int,
            "integer" => NetKind::Integer,
            _ => return None,
        })
    }

    fn range(&mut self) -> PResult<Range> {
        self.expect("[")?;
        let msb = self.expr()?;
        self.expect(":")?;
        let lsb = self.expr()?;
        self.expect("]")?;
        Ok(Range { msb, lsb })
    }

    // ---- module items --------------------------------------------------

    fn item(&mut self, items: &mut Vec<Item>) -> PResult<()> {
        let t = self.peek_tok().expect("caller checked eof");
        let pos = tok_pos(t);
        if t.kind == TokenKind::Directive {
            self.directive(t);
            self.pos += 1;
            return Ok(());
        }
        if t.kind == TokenKind::Keyword {
            match t.text.as_str() {
                "parameter" | "localparam" => {
                    let d = self.param_decl()?;
                    items.push(Item::Param(d));
                    return Ok(());
                }
                "typedef" => {
                    let d = self.typedef()?;
                    items.push(Item::TypedefEnum(d));
                    return Ok(());
                }
                "logic" | "reg" | "wire" | "bit" | "int" | "integer" | "enum" => {
                    let d = self.net_decl(true)?;
                    items.push(Item::Net(d));
                    return Ok(());
                }
                "assign" => {
                    self.pos += 1;
                    self.in_process = true;
                    loop {
                        let apos = self.current_pos();
                        let lhs = self.lvalue()?;
                        self.expect("=")?;
                        let rhs = self.expr()?;
                        items.push(Item::Assign(ContinuousAssign { lhs, rhs, pos: apos }));
                        if !self.eat(",") {
                            break;
                        }
                    }
                    self.in_process = false;
                    self.expect(";")?;
                    return Ok(());
                }
                "always" | "always_ff" | "always_comb" => {
                    let p = self.process()?;
                    items.push(Item::Process(p));
                    return Ok(());
                }
                "always_latch" => {
                    self.unsupported(pos, "always_latch");
                    self.pos += 1;
                    self.in_process = true;
                    let r = self.stmt();
                    self.in_process = false;
                    r?;
                    return Ok(());
                }
                "initial" | "final" => {
                    self.unsupported(pos, &t.text);
                    self.pos += 1;
                    self.in_process = true;
                    let r = self.stmt();
                    self.in_process = false;
                    r?;
                    return Ok(());
                }
                "generate" => {
                    self.unsupported(pos, "generate");
                    self.skip_to_keyword("endgenerate");
                    return Ok(());
                }
                "function" => {
                    self.unsupported(pos, "function");
                    self.skip_to_keyword("endfunction");
                    return Ok(());
                }
                "task" => {
                    self.unsupported(pos, "task");
                    self.skip_to_keyword("endtask");
                    return Ok(());
                }
                "interface" => {
                    self.unsupported(pos, "interface");
                    self.skip_to_keyword("endinterface");
                    return Ok(());
                }
                "genvar" | "for" | "assert" | "property" | "struct" | "specify" => {
                    self.unsupported(pos, &t.text);
                    self.pos += 1;
                    return Err(Fail);
                }
                "input" | "output" | "inout" => {
                    self.unsupported(pos, "port declaration in module body (non-ANSI style)");
                    self.pos += 1;
                    return Err(Fail);
                }
                "begin" => {
                    self.error_at(pos, DiagCode::Syntax, "'begin' outside of a procedural block");
                    self.pos += 1;
                    return Err(Fail);
                }
                _ => {}
            }
        }
        if t.kind == TokenKind::Ident {
            let next = self.peek_at(1);
            let after = self.peek_at(2);
            if next.is_some_and(|n| n.text == "#")
                || (next.is_some_and(|n| n.kind == TokenKind::Ident)
                    && after.is_some_and(|a| a.text == "("))
            {
                self.unsupported(pos, "module instantiation");
                return Err(Fail);
            }
            if next.is_some_and(|n| n.kind == TokenKind::Ident) {
                let d = self.net_decl(true)?;
                items.push(Item::Net(d));
                return Ok(());
            }
        }
        if t.text == "{" && t.kind == TokenKind::Punct {
            self.error_at(pos, DiagCode::BlockDelim, "brace used where begin...end expected")
                .note = Some("SystemVerilog groups statements with 'begin' ... 'end'; '{ }' is concatenation".into());
            return Err(Fail);
        }
        let found = self.describe_current();
        self.error_at(pos, DiagCode::Syntax, format!("unexpected {found} at module level"))
            .note = Some("expected a declaration, 'assign', or an always block".into());
        Err(Fail)
    }

    fn param_decl(&mut self) -> PResult<ParamDecl> {
        let local = self.peek_text() == "localparam";
        self.pos += 1;
        if self.check("type") {
            let p = self.current_pos();
            self.unsupported(p, "type parameter");
            return Err(Fail);
        }
        let mut kind = NetKind::Implicit;
        if let Some(k) = self.net_kind() {
            kind = k;
            self.pos += 1;
        }
        if self.check_kw("signed") || self.check_kw("unsigned") {
            self.pos += 1;
        }
        let range = if self.check("[") {
            Some(self.range()?)
        } else {
            None
        };
        let mut assigns = Vec::new();
        loop {
            let (name, pos) = self.ident("parameter name")?;
            self.expect("=")?;
            let value = self.expr()?;
            self.note_decl(&name, pos, true);
            assigns.push(ParamAssign { name, value, pos });
            if !self.eat(",") {
                break;
            }
            // `parameter A = 0, parameter B = 1` is a common slip; accept it.
            if self.check("parameter") || self.check("localparam") {
                self.pos += 1;
            }
        }
        self.expect(";")?;
        Ok(ParamDecl {
            local,
            kind,
            range,
            assigns,
        })
    }

    fn enum_type(&mut self) -> PResult<EnumType> {
        self.expect("enum")?;
        let base = if let Some(k) = self.net_kind() {
            self.pos += 1;
            let r = if self.check("[") {
                Some(self.range()?)
            } else {
                None
            };
            Some((k, r))
        } else if self.check("[") {
            let p = self.current_pos();
            self.error_at(p, DiagCode::Syntax, "enum range requires a base type such as 'logic'");
            return Err(Fail);
        } else {
            None
        };
        self.expect("{")?;
        let mut members = Vec::new();
        loop {
            let (name, pos) = self.ident("enum member name")?;
            if self.check("[") {
                let p = self.current_pos();
                self.unsupported(p, "enum member range");
                return Err(Fail);
            }
            let value = if self.eat("=") {
                Some(self.expr()?)
            } else {
                None
            };
            self.note_decl(&name, pos, true);
            members.push(EnumMember { name, value, pos });
            if !self.eat(",") {
                break;
            }
        }
        self.expect("}")?;
        Ok(EnumType { base, members })
    }

    fn typedef(&mut self) -> PResult<TypedefEnum> {
        let pos = self.current_pos();
        self.expect("typedef")?;
        if !self.check_kw("enum") {
            let p = self.current_pos();
            self.unsupported(p, "typedef of a non-enum type");
            return Err(Fail);
        }
        let ty = self.enum_type()?;
        let (name, _) = self.ident("type name")?;
        self.expect(";")?;
        self.typedefs.insert(name.clone());
        Ok(TypedefEnum { name, ty, pos })
    }

    fn net_decl(&mut self, module_level: bool) -> PResult<NetDecl> {
        let ty = if self.check_kw("enum") {
            DataType::Enum(self.enum_type()?)
        } else if let Some(kind) = self.net_kind() {
            self.pos += 1;
            if self.check_kw("signed") {
                let p = self.current_pos();
                self.unsupported(p, "signed types");
                self.pos += 1;
            } else if self.check_kw("unsigned") {
                self.pos += 1;
            }
            let range = if self.check("[") {
                Some(self.range()?)
            } else {
                None
            };
            DataType::Net { kind, range }
        } else {
            let (name, _) = self.ident("type name")?;
            DataType::Named(name)
        };
        let mut names = Vec::new();
        loop {
            let (name, pos) = self.ident("signal name")?;
            if self.check("[") {
                let p = self.current_pos();
                self.unsupported(p, "unpacked array");
                self.skip_balanced();
            }
            let init = if self.eat("=") {
                let was = self.in_process;
                self.in_process = true;
                let e = self.expr();
                self.in_process = was;
                Some(e?)
            } else {
                None
            };
            self.note_decl(&name, pos, module_level);
            names.push(DeclName { name, init, pos });
            if !self.eat(",") {
                break;
            }
        }
        self.expect(";")?;
        Ok(NetDecl { ty, names })
    }

    fn process(&mut self) -> PResult<Process> {
        let t = self.peek_tok().unwrap();
        let pos = tok_pos(t);
        let kw = t.text.clone();
        self.pos += 1;
        let mut kind = match kw.as_str() {
            "always_ff" => ProcessKind::AlwaysFf,
            "always_comb" => ProcessKind::AlwaysComb,
            _ => ProcessKind::AlwaysEdge,
        };
        let mut sensitivity = Vec::new();
        if kind != ProcessKind::AlwaysComb {
            if !self.check("@") {
                if kind == ProcessKind::AlwaysFf {
                    let p = self.current_pos();
                    self.error_at(p, DiagCode::Syntax, "always_ff requires an event control '@(...)'");
                    return Err(Fail);
                }
                self.unsupported(pos, "always block without event control");
                return Err(Fail);
            }
            self.pos += 1;
            if self.eat("*") {
                kind = ProcessKind::AlwaysStar;
            } else {
                self.expect("(")?;
                if self.check("*") {
                    self.pos += 1;
                    self.expect(")")?;
                    if kind == ProcessKind::AlwaysFf {
                        let p = pos;
                        self.error_at(p, DiagCode::Syntax, "always_ff cannot use '@(*)'");
                        return Err(Fail);
                    }
                    kind = ProcessKind::AlwaysStar;
                } else {
                    loop {
                        let spos = self.current_pos();
                        let edge = if self.eat("posedge") {
                            Edge::Pos
                        } else if self.eat("negedge") {
                            Edge::Neg
                        } else {
                            Edge::Level
                        };
                        let (signal, _) = self.ident("signal in event list")?;
                        if self.check("[") {
                            let p = self.current_pos();
                            self.unsupported(p, "select in event list");
                            self.skip_balanced();
                        }
                        sensitivity.push(Sensitivity {
                            edge,
                            signal,
                            pos: spos,
                        });
                        if !(self.eat("or") || self.eat(",")) {
                            break;
                        }
                    }
                    self.expect(")")?;
                }
            }
        } else if self.check("@") {
            let p = self.current_pos();
            self.error_at(p, DiagCode::Syntax, "always_comb takes no event control");
            return Err(Fail);
        }
        self.in_process = true;
        let body = self.stmt();
        self.in_process = false;
        Ok(Process {
            kind,
            sensitivity,
            body: body?,
            pos,
        })
    }

    // ---- statements ----------------------------------------------------

    fn stmt(&mut self) -> PResult<Stmt> {
        self.enter()?;
        let r = self.stmt_inner();
        self.leave();
        r
    }

    fn stmt_inner(&mut self) -> PResult<Stmt> {
        let Some(t) = self.peek_tok() else {
            let pos = self.eof_pos();
            self.error_at(pos, DiagCode::Syntax, "expected a statement, found end of input");
            return Err(Fail);
        };
        let pos = tok_pos(t);
        match (t.kind, t.text.as_str()) {
            (TokenKind::Punct, ";") => {
                self.pos += 1;
                Ok(Stmt::Null)
            }
            (TokenKind::Keyword, "begin") => self.block(),
            (TokenKind::Keyword, "if") => self.if_stmt(),
            (TokenKind::Keyword, "unique" | "unique0" | "priority") => {
                self.pos += 1;
                match self.peek_text() {
                    "if" => self.if_stmt(),
                    "case" | "casez" | "casex" => self.case_stmt(),
                    _ => {
                        let found = self.describe_current();
                        let p = self.current_pos();
                        self.error_at(p, DiagCode::Syntax, format!("expected 'if' or 'case', found {found}"));
                        Err(Fail)
                    }
                }
            }
            (TokenKind::Keyword, "case" | "casez" | "casex") => self.case_stmt(),
            (TokenKind::Keyword, "for") => {
                self.unsupported(pos, "for loop");
                self.pos += 1;
                self.skip_balanced();
                self.stmt()?;
                Ok(Stmt::Null)
            }
            (TokenKind::Keyword, "while" | "repeat") => {
                self.unsupported(pos, &t.text);
                self.pos += 1;
                self.skip_balanced();
                self.stmt()?;
                Ok(Stmt::Null)
            }
            (TokenKind::Keyword, "forever") => {
                self.unsupported(pos, "forever");
                self.pos += 1;
                self.stmt()?;
                Ok(Stmt::Null)
            }
            (TokenKind::Keyword, "do" | "return" | "disable") => {
                self.unsupported(pos, &t.text);
                Err(Fail)
            }
            (TokenKind::Keyword, "logic" | "reg" | "wire" | "bit" | "int" | "integer" | "enum") => {
                self.error_at(pos, DiagCode::DeclOrder, "declaration must appear before statements in a block")
                    .note = Some("move the declaration to the top of the begin...end block or to module level".into());
                self.net_decl(false)?;
                Ok(Stmt::Null)
            }
            (TokenKind::Keyword, "else") => {
                self.error_at(pos, DiagCode::Syntax, "'else' without matching 'if'")
                    .note = Some("check that 'begin' ... 'end' pairs enclose the if branch".into());
                Err(Fail)
            }
            (TokenKind::SystemIdent, _) => {
                self.unsupported(pos, &format!("system task {}", t.text));
                Err(Fail)
            }
            (TokenKind::Op, "#") => {
                self.unsupported(pos, "delay control");
                Err(Fail)
            }
            (TokenKind::Op, "@") => {
                self.unsupported(pos, "event control inside a procedural block");
                Err(Fail)
            }
            (TokenKind::Punct, "{") => {
                if self.brace_is_block() {
                    self.brace_block()
                } else {
                    self.assignment()
                }
            }
            (TokenKind::Ident, _) => {
                let next = self.peek_at(1);
                if next.is_some_and(|n| n.kind == TokenKind::Ident)
                    && self.peek_at(2).is_some_and(|a| matches!(a.text.as_str(), ";" | "," | "="))
                {
                    self.error_at(pos, DiagCode::DeclOrder, "declaration must appear before statements in a block")
                        .note = Some("move the declaration to the top of the begin...end block or to module level".into());
                    self.net_decl(false)?;
                    return Ok(Stmt::Null);
                }
                if next.is_some_and(|n| n.text == "(") {
                    self.unsupported(pos, "task or function call");
                    return Err(Fail);
                }
                self.assignment()
            }
            _ => {
                let found = self.describe_current();
                self.error_at(pos, DiagCode::Syntax, format!("expected a statement, found {found}"));
                Err(Fail)
            }
        }
    }

    /// A `{` at statement start opens a misplaced block when the braces hold
    /// statements rather than a concatenation target.
    fn brace_is_block(&self) -> bool {
        let mut depth = 0i32;
        let mut i = self.pos;
        while let Some(t) = self.toks.get(i) {
            if t.kind == TokenKind::Punct {
                match t.text.as_str() {
                    "{" | "(" | "[" => depth += 1,
                    "}" | ")" | "]" => {
                        depth -= 1;
                        if depth == 0 {
                            return false;
                        }
                    }
                    ";" if depth == 1 => return true,
                    _ => {}
                }
            } else if t.kind == TokenKind::Keyword
                && depth == 1
                && matches!(t.text.as_str(), "if" | "case" | "casez" | "begin" | "end" | "else")
            {
                return true;
            }
            if t.kind == TokenKind::Keyword && ITEM_KEYWORDS.contains(&t.text.as_str()) {
                return true;
            }
            i += 1;
        }
        true
    }

    fn brace_block(&mut self) -> PResult<Stmt> {
        let pos = self.current_pos();
        self.error_at(pos, DiagCode::BlockDelim, "brace used where begin...end expected")
            .note = Some("SystemVerilog groups statements with 'begin' ... 'end'; '{ }' is concatenation".into());
        self.pos += 1;
        let mut stmts = Vec::new();
        loop {
            if self.at_eof() {
                let p = self.eof_pos();
                self.error_at(p, DiagCode::Syntax, "unterminated '{' block");
                return Err(Fail);
            }
            if self.eat("}") {
                break;
            }
            if self.check_kw("endmodule") || self.check_kw("end") || self.check_kw("endcase") {
                let p = self.current_pos();
                self.error_at(p, DiagCode::BlockDelim, "missing '}' for brace-delimited block");
                return Err(Fail);
            }
            let start = self.pos;
            match self.stmt() {
                Ok(s) => stmts.push(s),
                Err(Fail) => {
                    self.recover_stmt();
                    if self.pos == start {
                        self.pos += 1;
                    }
                }
            }
        }
        Ok(Stmt::Block {
            label: None,
            decls: Vec::new(),
            stmts,
        })
    }

    fn block(&mut self) -> PResult<Stmt> {
        self.expect("begin")?;
        let label = if self.eat(":") {
            Some(self.ident("block label")?.0)
        } else {
            None
        };
        let mut decls = Vec::new();
        let mut stmts = Vec::new();
        let mut failed = false;
        loop {
            let Some(t) = self.peek_tok() else {
                let p = self.eof_pos();
                self.error_at(p, DiagCode::Syntax, "missing 'end' for 'begin'");
                return Err(Fail);
            };
            if t.is(TokenKind::Keyword, "end") {
                self.pos += 1;
                if self.eat(":") {
                    let _ = self.ident("block label");
                }
                break;
            }
            if t.kind == TokenKind::Keyword && ITEM_KEYWORDS.contains(&t.text.as_str()) {
                self.error_at(tok_pos(t), DiagCode::Syntax, format!("missing 'end' before '{}'", t.text))
                    .note = Some("every 'begin' needs a matching 'end'".into());
                return Err(Fail);
            }
            if t.is(TokenKind::Keyword, "endcase") {
                self.error_at(tok_pos(t), DiagCode::Syntax, "'endcase' inside 'begin' block; missing 'end'");
                return Err(Fail);
            }
            let is_decl = stmts.is_empty()
                && (self.net_kind().is_some()
                    || self.check_kw("enum")
                    || (t.kind == TokenKind::Ident
                        && self.peek_at(1).is_some_and(|n| n.kind == TokenKind::Ident)));
            let start = self.pos;
            if is_decl {
                match self.net_decl(false) {
                    Ok(d) => decls.push(d),
                    Err(Fail) => {
                        failed = true;
                        self.recover_stmt();
                        if self.pos == start {
                            self.pos += 1;
                        }
                    }
                }
                continue;
            }
            match self.stmt() {
                Ok(s) => stmts.push(s),
                Err(Fail) => {
                    failed = true;
                    self.recover_stmt();
                    if self.pos == start {
                        self.pos += 1;
                    }
                }
            }
        }
        let _ = failed;
        Ok(Stmt::Block {
            label,
            decls,
            stmts,
        })
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let pos = self.current_pos();
        self.expect("if")?;
        self.expect("(")?;
        let cond = self.expr()?;
        self.expect(")")?;
        let then = Box::new(self.stmt()?);
        let els = if self.eat("else") {
            Some(Box::new(self.stmt()?))
        } else {
            None
        };
        Ok(Stmt::If {
            cond,
            then,
            els,
            pos,
        })
    }

    fn case_stmt(&mut self) -> PResult<Stmt> {
        let t = self.peek_tok().unwrap();
        let pos = tok_pos(t);
        let kind = match t.text.as_str() {
            "casez" => CaseKind::Casez,
            "casex" => {
                self.unsupported(pos, "casex");
                CaseKind::Casez
            }
            _ => CaseKind::Case,
        };
        self.pos += 1;
        self.expect("(")?;
        let selector = self.expr()?;
        self.expect(")")?;
        if self.check("inside") {
            let p = self.current_pos();
            self.unsupported(p, "case inside");
            return Err(Fail);
        }
        let mut arms = Vec::new();
        let mut default = None;
        loop {
            let Some(t) = self.peek_tok() else {
                let p = self.eof_pos();
                self.error_at(p, DiagCode::Syntax, "missing 'endcase'");
                return Err(Fail);
            };
            if t.is(TokenKind::Keyword, "endcase") {
                self.pos += 1;
                break;
            }
            if t.kind == TokenKind::Keyword
                && (ITEM_KEYWORDS.contains(&t.text.as_str()) || t.text == "end")
            {
                self.error_at(tok_pos(t), DiagCode::Syntax, format!("missing 'endcase' before '{}'", t.text));
                return Err(Fail);
            }
            let start = self.pos;
            let arm = (|| -> PResult<()> {
                if self.eat("default") {
                    self.eat(":");
                    let body = self.stmt()?;
                    if default.is_some() {
                        self.error_at(tok_pos(t), DiagCode::Syntax, "multiple default items in case");
                    }
                    default = Some(Box::new(body));
                    return Ok(());
                }
                let mut labels = vec![self.expr()?];
                while self.eat(",") {
                    labels.push(self.expr()?);
                }
                self.expect(":")?;
                let body = self.stmt()?;
                arms.push(CaseArm { labels, body });
                Ok(())
            })();
            if arm.is_err() {
                self.recover_stmt();
                if self.pos == start {
                    self.pos += 1;
                }
            }
        }
        if arms.is_empty() && default.is_none() {
            self.error_at(pos, DiagCode::Syntax, "case statement has no items");
            return Err(Fail);
        }
        Ok(Stmt::Case {
            kind,
            selector,
            arms,
            default,
            pos,
        })
    }

    fn assignment(&mut self) -> PResult<Stmt> {
        let pos = self.current_pos();
        let lhs = self.lvalue()?;
        let op = self.peek_tok();
        let stmt = match op.map(|t| t.text.as_str()) {
            Some("=") => {
                self.pos += 1;
                let rhs = self.expr()?;
                Stmt::Blocking { lhs, rhs, pos }
            }
            Some("<=") => {
                self.pos += 1;
                let rhs = self.expr()?;
                Stmt::Nonblocking { lhs, rhs, pos }
            }
            Some("++" | "--" | "+=" | "-=" | "*=" | "/=" | "|=" | "&=" | "^=" | "<<=" | ">>=") => {
                let p = self.current_pos();
                let text = op.unwrap().text.clone();
                self.unsupported(p, &format!("operator '{text}'"));
                return Err(Fail);
            }
            _ => {
                let found = self.describe_current();
                let p = self.current_pos();
                self.error_at(p, DiagCode::Syntax, format!("expected '=' or '<=', found {found}"));
                return Err(Fail);
            }
        };
        if !self.check(";") {
            let found = self.describe_current();
            let p = self.current_pos();
            self.error_at(p, DiagCode::Syntax, format!("expected ';' after assignment, found {found}"));
            return Err(Fail);
        }
        self.pos += 1;
        Ok(stmt)
    }

    fn lvalue(&mut self) -> PResult<Expr> {
        if self.check("{") {
            let pos = self.current_pos();
            self.pos += 1;
            let mut items = vec![self.lvalue()?];
            while self.eat(",") {
                items.push(self.lvalue()?);
            }
            self.expect("}")?;
            return Ok(Expr::new(ExprKind::Concat(items), pos));
        }
        let (name, pos) = self.ident("assignment target")?;
        self.note_use(&name, pos);
        let base = Expr::new(ExprKind::Ref(name), pos);
        self.selects(base)
    }

    // ---- expressions ---------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let r = self.ternary();
        self.leave();
        r
    }

    fn ternary(&mut self) -> PResult<Expr> {
        let cond = self.binary(1)?;
        if self.check("?") {
            let pos = self.current_pos();
            self.pos += 1;
            let t = self.expr()?;
            self.expect(":")?;
            let e = self.expr()?;
            return Ok(Expr::new(
                ExprKind::Ternary(Box::new(cond), Box::new(t), Box::new(e)),
                pos,
            ));
        }
        Ok(cond)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        let t = self.peek_tok()?;
        if t.kind != TokenKind::Op {
            return None;
        }
        BinaryOp::from_symbol(&t.text)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let pos = self.current_pos();
            self.pos += 1;
            self.enter()?;
            let rhs = self.binary(prec + 1);
            self.leave();
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs?)), pos);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let Some(t) = self.peek_tok() else {
            let p = self.eof_pos();
            self.error_at(p, DiagCode::Syntax, "expected an expression, found end of input");
            return Err(Fail);
        };
        if t.kind == TokenKind::Op {
            let op = match t.text.as_str() {
                "~" => Some(UnaryOp::Not),
                "!" => Some(UnaryOp::LogicNot),
                "&" => Some(UnaryOp::ReduceAnd),
                "|" => Some(UnaryOp::ReduceOr),
                "^" => Some(UnaryOp::ReduceXor),
                "~&" => Some(UnaryOp::ReduceNand),
                "~|" => Some(UnaryOp::ReduceNor),
                "~^" | "^~" => Some(UnaryOp::ReduceXnor),
                "-" => Some(UnaryOp::Neg),
                "+" => Some(UnaryOp::Plus),
                _ => None,
            };
            if let Some(op) = op {
                let pos = tok_pos(t);
                self.pos += 1;
                self.enter()?;
                let e = self.unary();
                self.leave();
                return Ok(Expr::new(ExprKind::Unary(op, Box::new(e?)), pos));
            }
        }
        let prim = self.primary()?;
        self.selects(prim)
    }

    fn selects(&mut self, mut base: Expr) -> PResult<Expr> {
        while self.check("[") {
            let pos = self.current_pos();
            self.pos += 1;
            let first = self.expr()?;
            if self.eat(":") {
                let lsb = self.expr()?;
                self.expect("]")?;
                base = Expr::new(
                    ExprKind::PartSelect {
                        base: Box::new(base),
                        msb: Box::new(first),
                        lsb: Box::new(lsb),
                    },
                    pos,
                );
            } else if self.check("+:") || self.check("-:") {
                let ascending = self.check("+:");
                self.pos += 1;
                let width = self.expr()?;
                self.expect("]")?;
                base = Expr::new(
                    ExprKind::IndexedPartSelect {
                        base: Box::new(base),
                        start: Box::new(first),
                        width: Box::new(width),
                        ascending,
                    },
                    pos,
                );
            } else {
                self.expect("]")?;
                base = Expr::new(ExprKind::BitSelect(Box::new(base), Box::new(first)), pos);
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.peek_tok().unwrap();
        let pos = tok_pos(t);
        match t.kind {
            TokenKind::Literal => {
                self.pos += 1;
                Ok(Expr::new(
                    ExprKind::Literal(Literal {
                        text: t.text.clone(),
                    }),
                    pos,
                ))
            }
            TokenKind::Ident => {
                self.pos += 1;
                if self.check("::") {
                    self.unsupported(pos, "package scope reference");
                    return Err(Fail);
                }
                if self.check("(") {
                    self.unsupported(pos, "function call");
                    return Err(Fail);
                }
                self.note_use(&t.text, pos);
                Ok(Expr::new(ExprKind::Ref(t.text.clone()), pos))
            }
            TokenKind::SystemIdent => {
                self.unsupported(pos, &format!("system function {}", t.text));
                Err(Fail)
            }
            TokenKind::Punct if t.text == "(" => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            TokenKind::Punct if t.text == "{" => {
                self.pos += 1;
                let first = self.expr()?;
                if self.check("{") {
                    self.pos += 1;
                    let mut items = vec![self.expr()?];
                    while self.eat(",") {
                        items.push(self.expr()?);
                    }
                    self.expect("}")?;
                    self.expect("}")?;
                    return Ok(Expr::new(ExprKind::Replicate(Box::new(first), items), pos));
                }
                let mut items = vec![first];
                while self.eat(",") {
                    items.push(self.expr()?);
                }
                self.expect("}")?;
                Ok(Expr::new(ExprKind::Concat(items), pos))
            }
            TokenKind::Op if t.text == "'" => {
                self.unsupported(pos, "assignment pattern or cast");
                Err(Fail)
            }
            _ => {
                self.error_at(pos, DiagCode::Syntax, format!("expected an expression, found '{}'", t.text));
                Err(Fail)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FSM1: &str = r#"
module top_module(
    input clk,
    input areset,    // Asynchronous reset to state B
    input in,
    output out);

    parameter A = 0, B = 1;
    logic state;

    always_ff @(posedge clk, posedge areset) begin
        if (areset)
            state <= B;
        else
            state <= in ? state : ~state;
    end

    assign out = (state == B);

endmodule
"#;

    fn errors(src: &str) -> Vec<Diagnostic> {
        parse_source(src).unwrap_err()
    }

    #[test]
    fn fsm1_style_module() {
        let m = parse_source(FSM1).unwrap().module;
        assert_eq!(m.name, "top_module");
        assert_eq!(m.ports.len(), 4);
        assert_eq!(
            m.ports[1].comment.as_deref(),
            Some("Asynchronous reset to state B")
        );
        let procs: Vec<&Process> = m
            .items
            .iter()
            .filter_map(|i| match i {
                Item::Process(p) => Some(p),
                _ => None,
            })
            .collect();
        assert_eq!(procs.len(), 1);
        assert_eq!(procs[0].kind, ProcessKind::AlwaysFf);
        assert_eq!(procs[0].sensitivity.len(), 2);
        let assigns = m.items.iter().filter(|i| matches!(i, Item::Assign(_))).count();
        assert_eq!(assigns, 1);
    }

    #[test]
    fn brace_block_reports_block_delim() {
        let src = "module m(input x, output logic y);\n always_comb begin\n  if (x) { y = 1; }\n  else y = 0;\n end\nendmodule\n";
        let ds = errors(src);
        assert_eq!(ds.len(), 1, "{ds:?}");
        assert_eq!(ds[0].code, DiagCode::BlockDelim);
        assert_eq!((ds[0].line, ds[0].column), (3, 10));
        assert!(ds[0].message.contains("begin...end"));
    }

    #[test]
    fn initial_is_unsupported() {
        let src = "module m(input a, output logic b);\n initial begin b = 0; end\n assign b = a;\nendmodule";
        let ds = errors(src);
        assert!(ds.iter().all(|d| d.code == DiagCode::Unsupported), "{ds:?}");
        assert!(ds[0].message.contains("initial"));
    }

    #[test]
    fn casex_generate_function_are_unsupported() {
        for (snippet, word) in [
            ("always_comb casex (a) 1'b1: b = 1; default: b = 0; endcase", "casex"),
            ("generate if (1) begin end endgenerate", "generate"),
            ("function logic f(input x); f = x; endfunction", "function"),
            ("`define FOO 1", "directive"),
            ("logic [1:0] mem [0:3];", "unpacked"),
        ] {
            let src = format!("module m(input a, output logic b);\n{snippet}\nendmodule");
            let ds = errors(&src);
            assert!(
                ds.iter().any(|d| d.code == DiagCode::Unsupported && d.message.contains(word)),
                "{snippet}: {ds:?}"
            );
        }
    }

    #[test]
    fn recovers_to_report_multiple_errors() {
        let src = "module m(input a, output logic b, output logic c);\n always_comb begin\n  b = a +;\n  c = ;\n end\nendmodule";
        let ds = errors(src);
        assert_eq!(ds.len(), 2, "{ds:?}");
        assert_eq!(ds[0].line, 3);
        assert_eq!(ds[1].line, 4);
    }

    #[test]
    fn declaration_after_use_warns() {
        let src = "module m(input a, output logic b);\n always_comb next_b = a;\n logic next_b;\n assign b = next_b;\nendmodule";
        let parsed = parse_source(src).unwrap();
        assert_eq!(parsed.warnings.len(), 1);
        assert_eq!(parsed.warnings[0].code, DiagCode::DeclOrder);
        assert_eq!(parsed.warnings[0].line, 3);
    }

    #[test]
    fn declaration_after_statement_in_block_is_error() {
        let src = "module m(input a, output logic b);\n always_comb begin\n  b = a;\n  logic t;\n end\nendmodule";
        let ds = errors(src);
        assert_eq!(ds[0].code, DiagCode::DeclOrder);
    }

    #[test]
    fn typedef_enum_and_case() {
        let src = r#"module top_module(input clk, input reset, input j, input k, output logic out);
  typedef enum logic [0:0] {OFF, ON} state_t;
  state_t state, next;
  always_comb begin
    next = state;
    unique case (state)
      OFF: if (j) next = ON;
      ON: if (k) next = OFF;
      default: next = OFF;
    endcase
  end
  always_ff @(posedge clk) if (reset) state <= OFF; else state <= next;
  assign out = state == ON;
endmodule"#;
        let m = parse_source(src).unwrap().module;
        assert!(matches!(m.items[0], Item::TypedefEnum(_)));
        assert!(matches!(&m.items[1], Item::Net(NetDecl { ty: DataType::Named(n), .. }) if n == "state_t"));
    }

    #[test]
    fn concat_lvalue_is_not_a_block() {
        let src = "module m(input [1:0] a, output logic b, output logic c);\n always_comb begin\n  {b, c} = a;\n end\nendmodule";
        assert!(parse_source(src).is_ok());
    }

    #[test]
    fn expression_precedence() {
        let e = parse_expression("a | b & c == d").unwrap();
        match e.kind {
            ExprKind::Binary(BinaryOp::Or, _, rhs) => match rhs.kind {
                ExprKind::Binary(BinaryOp::And, _, r2) => {
                    assert!(matches!(r2.kind, ExprKind::Binary(BinaryOp::Eq, _, _)))
                }
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn deep_nesting_is_diagnosed_not_overflowed() {
        let src = format!("module m(input a, output b); assign b = {}a{};\nendmodule", "(".repeat(5000), ")".repeat(5000));
        let ds = errors(&src);
        assert!(ds.iter().any(|d| d.message.contains("nesting")));
    }
}
