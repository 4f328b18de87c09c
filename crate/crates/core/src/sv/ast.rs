//! Syntax tree for a single module of the supported subset.

use serde::{Deserialize, Serialize};

use super::lexer::{decode_literal, LiteralValue};

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl Pos {
    pub fn new(line: u32, column: u32) -> Self {
        Pos { line, column }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Input,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NetKind {
    /// No data type given, e.g. `input clk`.
    Implicit,
    Logic,
    Reg,
    Wire,
    Bit,
    Int,
    Integer,
}

impl NetKind {
    /// Nets cannot be assigned from procedural code.
    pub fn is_net(self) -> bool {
        matches!(self, NetKind::Implicit | NetKind::Wire)
    }

    pub fn keyword(self) -> Option<&'static str> {
        match self {
            NetKind::Implicit => None,
            NetKind::Logic => Some("logic"),
            NetKind::Reg => Some("reg"),
            NetKind::Wire => Some("wire"),
            NetKind::Bit => Some("bit"),
            NetKind::Int => Some("int"),
            NetKind::Integer => Some("integer"),
        }
    }
}

/// Packed range `[msb:lsb]`; both bounds are constant expressions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Range {
    pub msb: Expr,
    pub lsb: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsiPort {
    pub direction: Direction,
    pub kind: NetKind,
    pub range: Option<Range>,
    pub name: String,
    pub comment: Option<String>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleAst {
    pub name: String,
    pub ports: Vec<AnsiPort>,
    pub items: Vec<Item>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Item {
    Param(ParamDecl),
    TypedefEnum(TypedefEnum),
    Net(NetDecl),
    Assign(ContinuousAssign),
    Process(Process),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamDecl {
    pub local: bool,
    pub kind: NetKind,
    pub range: Option<Range>,
    pub assigns: Vec<ParamAssign>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamAssign {
    pub name: String,
    pub value: Expr,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumType {
    /// Base type; `None` means the default `int`.
    pub base: Option<(NetKind, Option<Range>)>,
    pub members: Vec<EnumMember>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumMember {
    pub name: String,
    pub value: Option<Expr>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypedefEnum {
    pub name: String,
    pub ty: EnumType,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataType {
    Net { kind: NetKind, range: Option<Range> },
    /// Reference to a typedef.
    Named(String),
    /// Anonymous `enum {...}` declared inline.
    Enum(EnumType),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetDecl {
    pub ty: DataType,
    pub names: Vec<DeclName>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclName {
    pub name: String,
    /// `wire w = expr;` shorthand for a continuous assignment.
    pub init: Option<Expr>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuousAssign {
    pub lhs: Expr,
    pub rhs: Expr,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProcessKind {
    AlwaysFf,
    AlwaysComb,
    /// `always @*` or `always @(*)`.
    AlwaysStar,
    /// `always @(...)` with an explicit event list.
    AlwaysEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Edge {
    Pos,
    Neg,
    Level,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub edge: Edge,
    pub signal: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Process {
    pub kind: ProcessKind,
    pub sensitivity: Vec<Sensitivity>,
    pub body: Stmt,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseKind {
    Case,
    Casez,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseArm {
    pub labels: Vec<Expr>,
    pub body: Stmt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stmt {
    Block {
        label: Option<String>,
        decls: Vec<NetDecl>,
        stmts: Vec<Stmt>,
    },
    If {
        cond: Expr,
        then: Box<Stmt>,
        els: Option<Box<Stmt>>,
        pos: Pos,
    },
    Case {
        kind: CaseKind,
        selector: Expr,
        arms: Vec<CaseArm>,
        default: Option<Box<Stmt>>,
        pos: Pos,
    },
    Blocking {
        lhs: Expr,
        rhs: Expr,
        pos: Pos,
    },
    Nonblocking {
        lhs: Expr,
        rhs: Expr,
        pos: Pos,
    },
    Null,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnaryOp {
    Not,
    LogicNot,
    ReduceAnd,
    ReduceOr,
    ReduceXor,
    ReduceNand,
    ReduceNor,
    ReduceXnor,
    Neg,
    Plus,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Not => "~",
            UnaryOp::LogicNot => "!",
            UnaryOp::ReduceAnd => "&",
            UnaryOp::ReduceOr => "|",
            UnaryOp::ReduceXor => "^",
            UnaryOp::ReduceNand => "~&",
            UnaryOp::ReduceNor => "~|",
            UnaryOp::ReduceXnor => "~^",
            UnaryOp::Neg => "-",
            UnaryOp::Plus => "+",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinaryOp {
    And,
    Or,
    Xor,
    Xnor,
    LogicAnd,
    LogicOr,
    Eq,
    Ne,
    CaseEq,
    CaseNe,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Shl,
    Shr,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::And => "&",
            BinaryOp::Or => "|",
            BinaryOp::Xor => "^",
            BinaryOp::Xnor => "~^",
            BinaryOp::LogicAnd => "&&",
            BinaryOp::LogicOr => "||",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::CaseEq => "===",
            BinaryOp::CaseNe => "!==",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Mul => 10,
            BinaryOp::Add | BinaryOp::Sub => 9,
            BinaryOp::Shl | BinaryOp::Shr => 8,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 7,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::CaseEq | BinaryOp::CaseNe => 6,
            BinaryOp::And => 5,
            BinaryOp::Xor | BinaryOp::Xnor => 4,
            BinaryOp::Or => 3,
            BinaryOp::LogicAnd => 2,
            BinaryOp::LogicOr => 1,
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "&" => BinaryOp::And,
            "|" => BinaryOp::Or,
            "^" => BinaryOp::Xor,
            "~^" | "^~" => BinaryOp::Xnor,
            "&&" => BinaryOp::LogicAnd,
            "||" => BinaryOp::LogicOr,
            "==" => BinaryOp::Eq,
            "!=" => BinaryOp::Ne,
            "===" => BinaryOp::CaseEq,
            "!==" => BinaryOp::CaseNe,
            "<" => BinaryOp::Lt,
            "<=" => BinaryOp::Le,
            ">" => BinaryOp::Gt,
            ">=" => BinaryOp::Ge,
            "+" => BinaryOp::Add,
            "-" => BinaryOp::Sub,
            "*" => BinaryOp::Mul,
            "<<" | "<<<" => BinaryOp::Shl,
            ">>" | ">>>" => BinaryOp::Shr,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    /// Source spelling, kept for printing.
    pub text: String,
}

impl Literal {
    pub fn value(&self) -> LiteralValue {
        decode_literal(&self.text).expect("literal validated by the lexer")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExprKind {
    /// Signal, parameter or enum member name.
    Ref(String),
    BitSelect(Box<Expr>, Box<Expr>),
    PartSelect {
        base: Box<Expr>,
        msb: Box<Expr>,
        lsb: Box<Expr>,
    },
    /// `base[start +: width]` / `base[start -: width]`.
    IndexedPartSelect {
        base: Box<Expr>,
        start: Box<Expr>,
        width: Box<Expr>,
        ascending: bool,
    },
    Concat(Vec<Expr>),
    Replicate(Box<Expr>, Vec<Expr>),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    Literal(Literal),
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Self {
        Expr { kind, pos }
    }

    /// Calls `f` on every `Ref` name in the expression, in source order.
    pub fn for_each_ref<'a>(&'a self, f: &mut impl FnMut(&'a str, Pos)) {
        match &self.kind {
            ExprKind::Ref(n) => f(n, self.pos),
            ExprKind::BitSelect(b, i) => {
                b.for_each_ref(f);
                i.for_each_ref(f);
            }
            ExprKind::PartSelect { base, msb, lsb } => {
                base.for_each_ref(f);
                msb.for_each_ref(f);
                lsb.for_each_ref(f);
            }
            ExprKind::IndexedPartSelect {
                base, start, width, ..
            } => {
                base.for_each_ref(f);
                start.for_each_ref(f);
                width.for_each_ref(f);
            }
            ExprKind::Concat(items) => items.iter().for_each(|e| e.for_each_ref(f)),
            ExprKind::Replicate(n, items) => {
                n.for_each_ref(f);
                items.iter().for_each(|e| e.for_each_ref(f));
            }
            ExprKind::Unary(_, e) => e.for_each_ref(f),
            ExprKind::Binary(_, a, b) => {
                a.for_each_ref(f);
                b.for_each_ref(f);
            }
            ExprKind::Ternary(c, t, e) => {
                c.for_each_ref(f);
                t.for_each_ref(f);
                e.for_each_ref(f);
            }
            ExprKind::Literal(_) => {}
        }
    }
}

/// Clears every source position so two trees can be compared structurally.
pub trait StripPositions {
    fn strip_positions(&mut self);
}

impl StripPositions for Expr {
    fn strip_positions(&mut self) {
        self.pos = Pos::default();
        match &mut self.kind {
            ExprKind::Ref(_) | ExprKind::Literal(_) => {}
            ExprKind::BitSelect(b, i) => {
                b.strip_positions();
                i.strip_positions();
            }
            ExprKind::PartSelect { base, msb, lsb } => {
                base.strip_positions();
                msb.strip_positions();
                lsb.strip_positions();
            }
            ExprKind::IndexedPartSelect {
                base, start, width, ..
            } => {
                base.strip_positions();
                start.strip_positions();
                width.strip_positions();
            }
            ExprKind::Concat(items) => items.iter_mut().for_each(|e| e.strip_positions()),
            ExprKind::Replicate(n, items) => {
                n.strip_positions();
                items.iter_mut().for_each(|e| e.strip_positions());
            }
            ExprKind::Unary(_, e) => e.strip_positions(),
            ExprKind::Binary(_, a, b) => {
                a.strip_positions();
                b.strip_positions();
            }
            ExprKind::Ternary(c, t, e) => {
                c.strip_positions();
                t.strip_positions();
                e.strip_positions();
            }
        }
    }
}

impl StripPositions for Range {
    fn strip_positions(&mut self) {
        self.msb.strip_positions();
        self.lsb.strip_positions();
    }
}

impl StripPositions for EnumType {
    fn strip_positions(&mut self) {
        if let Some((_, Some(r))) = &mut self.base {
            r.strip_positions();
        }
        for m in &mut self.members {
            m.pos = Pos::default();
            if let Some(v) = &mut m.value {
                v.strip_positions();
            }
        }
    }
}

impl StripPositions for NetDecl {
    fn strip_positions(&mut self) {
        match &mut self.ty {
            DataType::Net { range: Some(r), .. } => r.strip_positions(),
            DataType::Enum(e) => e.strip_positions(),
            _ => {}
        }
        for n in &mut self.names {
            n.pos = Pos::default();
            if let Some(i) = &mut n.init {
                i.strip_positions();
            }
        }
    }
}

impl StripPositions for Stmt {
    fn strip_positions(&mut self) {
        match self {
            Stmt::Block { decls, stmts, .. } => {
                decls.iter_mut().for_each(|d| d.strip_positions());
                stmts.iter_mut().for_each(|s| s.strip_positions());
            }
            Stmt::If {
                cond,
                then,
                els,
                pos,
            } => {
                *pos = Pos::default();
                cond.strip_positions();
                then.strip_positions();
                if let Some(e) = els {
                    e.strip_positions();
                }
            }
            Stmt::Case {
                selector,
                arms,
                default,
                pos,
                ..
            } => {
                *pos = Pos::default();
                selector.strip_positions();
                for arm in arms {
                    arm.labels.iter_mut().for_each(|l| l.strip_positions());
                    arm.body.strip_positions();
                }
                if let Some(d) = default {
                    d.strip_positions();
                }
            }
            Stmt::Blocking { lhs, rhs, pos } | Stmt::Nonblocking { lhs, rhs, pos } => {
                *pos = Pos::default();
                lhs.strip_positions();
                rhs.strip_positions();
            }
            Stmt::Null => {}
        }
    }
}

impl StripPositions for ModuleAst {
    fn strip_positions(&mut self) {
        self.pos = Pos::default();
        for p in &mut self.ports {
            p.pos = Pos::default();
            if let Some(r) = &mut p.range {
                r.strip_positions();
            }
        }
        for item in &mut self.items {
            match item {
                Item::Param(p) => {
                    if let Some(r) = &mut p.range {
                        r.strip_positions();
                    }
                    for a in &mut p.assigns {
                        a.pos = Pos::default();
                        a.value.strip_positions();
                    }
                }
                Item::TypedefEnum(t) => {
                    t.pos = Pos::default();
                    t.ty.strip_positions();
                }
                Item::Net(n) => n.strip_positions(),
                Item::Assign(a) => {
                    a.pos = Pos::default();
                    a.lhs.strip_positions();
                    a.rhs.strip_positions();
                }
                Item::Process(p) => {
                    p.pos = Pos::default();
                    p.sensitivity.iter_mut().for_each(|s| s.pos = Pos::default());
                    p.body.strip_positions();
                }
            }
        }
    }
}
