//! Elaboration: symbol resolution, width computation, lowering to IR, driver
//! map and the semantic checks behind the failure taxonomy.

pub mod interface;
pub mod ir;
pub mod reset;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::logic::{LogicVec, MAX_WIDTH};
use crate::sv::ast::*;
use crate::sv::diag::{has_errors, DiagCode, Diagnostic};

pub use interface::check_interface;
pub use ir::{IrExpr, IrKind, IrStmt, SigId, Var};
pub use reset::{classify_reset, ResetStyle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignalKind {
    Input,
    Output,
    Internal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Storage {
    Register,
    Comb,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signal {
    pub name: String,
    pub width: u32,
    /// Index of the least significant bit in the declared range.
    pub lsb: i64,
    pub kind: SignalKind,
    pub storage: Storage,
    /// Declared as a net (`wire` or a port without data type).
    pub is_net: bool,
    /// Driven by a combinational process that does not assign it on every path.
    pub latch: bool,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProcClass {
    /// Continuous assignment.
    Assign,
    /// `always_comb`, `always @(*)` or a level-sensitive event list.
    Comb,
    /// Edge-triggered process.
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensEntry {
    pub signal: SigId,
    pub edge: Edge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalVar {
    pub name: String,
    pub width: u32,
    pub lsb: i64,
}

/// The condition of the first `if` in a clocked process when it tests a
/// single signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResetGuard {
    pub signal: SigId,
    pub active_high: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proc {
    pub class: ProcClass,
    pub source: Option<ProcessKind>,
    pub sensitivity: Vec<SensEntry>,
    pub clock: Option<SigId>,
    pub body: Vec<IrStmt>,
    pub locals: Vec<LocalVar>,
    /// Bits of each signal this process may write.
    pub drives: BTreeMap<SigId, u64>,
    pub reads: BTreeSet<SigId>,
    pub first_guard: Option<ResetGuard>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriverSite {
    pub process: usize,
    pub mask: u64,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResetInfo {
    pub signal: String,
    pub style: ResetStyle,
    pub active_high: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumEncoding {
    /// Typedef name; `None` for an inline enum.
    pub name: Option<String>,
    pub width: u32,
    pub members: Vec<(String, u64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Design {
    pub name: String,
    /// Ports first, in header order, then internal signals in declaration order.
    pub signals: Vec<Signal>,
    pub processes: Vec<Proc>,
    pub drivers: BTreeMap<SigId, Vec<DriverSite>>,
    pub clock: Option<SigId>,
    pub resets: Vec<ResetInfo>,
    pub enums: Vec<EnumEncoding>,
    pub params: BTreeMap<String, LogicVec>,
    /// Combinational processes in dependency order.
    pub comb_order: Vec<usize>,
    /// Combinational processes that sit on or behind a dependency cycle.
    pub comb_cyclic: BTreeSet<usize>,
    pub warnings: Vec<Diagnostic>,
}

impl Design {
    pub fn signal(&self, name: &str) -> Option<SigId> {
        self.signals.iter().position(|s| s.name == name)
    }

    pub fn ports(&self) -> impl Iterator<Item = (SigId, &Signal)> {
        self.signals
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind != SignalKind::Internal)
    }

    pub fn inputs(&self) -> impl Iterator<Item = (SigId, &Signal)> {
        self.signals
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind == SignalKind::Input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = (SigId, &Signal)> {
        self.signals
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind == SignalKind::Output)
    }

    /// Signals whose values carry state between steps.
    pub fn state_signals(&self) -> Vec<SigId> {
        let mut cyclic_driven = BTreeSet::new();
        for &p in &self.comb_cyclic {
            cyclic_driven.extend(self.processes[p].drives.keys().copied());
        }
        (0..self.signals.len())
            .filter(|&i| {
                let s = &self.signals[i];
                s.kind != SignalKind::Input
                    && (s.storage == Storage::Register || s.latch || cyclic_driven.contains(&i))
            })
            .collect()
    }

    /// Signals appearing with an edge in some sensitivity list.
    pub fn edge_signals(&self) -> Vec<SigId> {
        let mut set = BTreeSet::new();
        for p in &self.processes {
            for s in &p.sensitivity {
                if s.edge != Edge::Level {
                    set.insert(s.signal);
                }
            }
        }
        set.into_iter().collect()
    }
}

/// Elaborates a parsed module. Warnings from a successful run are kept in
/// `Design::warnings`; on failure all diagnostics are returned.
pub fn elaborate(ast: &ModuleAst) -> Result<Design, Vec<Diagnostic>> {
    let mut cx = Cx::default();
    cx.declare_ports(ast);
    cx.declare_items(ast);
    cx.lower_items(ast);
    cx.finish(ast)
}

/// Lowers a standalone expression whose names refer to `symbols`; symbol `i`
/// becomes `Var::Sig(i)`. Symbols are `(name, width, lsb)`. Used for
/// golden-model guards and output values.
pub fn lower_expression(e: &Expr, symbols: &[(String, u32, i64)], width: u32) -> Result<IrExpr, Vec<Diagnostic>> {
    let mut cx = Cx::default();
    for (name, w, lsb) in symbols {
        cx.index.insert(name.clone(), cx.signals.len());
        cx.decl_pos.insert(name.clone(), Pos::default());
        cx.signals.push(Signal {
            name: name.clone(),
            width: *w,
            lsb: *lsb,
            kind: SignalKind::Internal,
            storage: Storage::Comb,
            is_net: false,
            latch: false,
            pos: Pos::default(),
        });
    }
    let ir = cx.lower(e, width);
    if has_errors(&cx.diags) {
        Err(cx.diags)
    } else {
        Ok(ir)
    }
}

pub(crate) fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

fn min_bits(v: u64) -> u32 {
    (64 - v.leading_zeros()).max(1)
}

#[derive(Debug, Clone, Copy)]
struct ConstInfo {
    value: LogicVec,
    sized: bool,
}

#[derive(Debug, Clone, Copy)]
enum Resolved {
    Const(ConstInfo),
    Sig(SigId),
    Local(u32),
}

#[derive(Default)]
struct ProcState {
    class: Option<ProcClass>,
    scopes: Vec<HashMap<String, u32>>,
    locals: Vec<LocalVar>,
    drives: BTreeMap<SigId, u64>,
    drive_pos: BTreeMap<SigId, Pos>,
    reads: BTreeSet<SigId>,
}

#[derive(Default)]
struct Cx {
    diags: Vec<Diagnostic>,
    consts: HashMap<String, ConstInfo>,
    enum_types: HashMap<String, usize>,
    enums: Vec<EnumEncoding>,
    params: BTreeMap<String, LogicVec>,
    signals: Vec<Signal>,
    index: HashMap<String, SigId>,
    decl_pos: HashMap<String, Pos>,
    reported: HashSet<String>,
    procs: Vec<Proc>,
    proc_sites: Vec<BTreeMap<SigId, Pos>>,
    p: ProcState,
}

impl Cx {
    fn error(&mut self, code: DiagCode, pos: Pos, msg: impl Into<String>) -> &mut Diagnostic {
        self.diags
            .push(Diagnostic::error(code, msg, pos.line, pos.column));
        self.diags.last_mut().unwrap()
    }

    fn warn(&mut self, code: DiagCode, pos: Pos, msg: impl Into<String>) -> &mut Diagnostic {
        self.diags
            .push(Diagnostic::warning(code, msg, pos.line, pos.column));
        self.diags.last_mut().unwrap()
    }

    fn check_fresh(&mut self, name: &str, pos: Pos) -> bool {
        if let Some(prev) = self.decl_pos.get(name).copied() {
            self.error(DiagCode::Redeclared, pos, format!("'{name}' is already declared"))
                .note = Some(format!("previous declaration at line {}, column {}", prev.line, prev.column));
            return false;
        }
        self.decl_pos.insert(name.to_string(), pos);
        true
    }

    // ---- declarations --------------------------------------------------

    fn range_width(&mut self, r: &Range) -> Option<(u32, i64)> {
        let msb = self.const_eval(&r.msb)?;
        let lsb = self.const_eval(&r.lsb)?;
        let (Some(m), Some(l)) = (msb.to_u64(), lsb.to_u64()) else {
            self.error(DiagCode::Const, r.msb.pos, "range bounds contain unknown bits");
            return None;
        };
        if m < l {
            self.error(DiagCode::Unsupported, r.msb.pos, format!("unsupported construct: ascending range [{m}:{l}]"))
                .note = Some("declare vectors as [msb:lsb] with msb >= lsb".into());
            return None;
        }
        let w = m - l + 1;
        if w > MAX_WIDTH as u64 {
            self.error(DiagCode::Unsupported, r.msb.pos, format!("unsupported construct: {w}-bit vector (limit is {MAX_WIDTH})"));
            return None;
        }
        Some((w as u32, l as i64))
    }

    fn kind_width(kind: NetKind) -> u32 {
        match kind {
            NetKind::Int | NetKind::Integer => 32,
            _ => 1,
        }
    }

    fn declare_ports(&mut self, ast: &ModuleAst) {
        for p in &ast.ports {
            let (width, lsb) = match &p.range {
                Some(r) => self.range_width(r).unwrap_or((1, 0)),
                None => (Self::kind_width(p.kind), 0),
            };
            if !self.check_fresh(&p.name, p.pos) {
                continue;
            }
            let kind = match p.direction {
                Direction::Input => SignalKind::Input,
                Direction::Output => SignalKind::Output,
            };
            self.index.insert(p.name.clone(), self.signals.len());
            self.signals.push(Signal {
                name: p.name.clone(),
                width,
                lsb,
                kind,
                storage: Storage::Comb,
                is_net: p.kind.is_net(),
                latch: false,
                pos: p.pos,
            });
        }
    }

    fn declare_enum(&mut self, name: Option<&str>, ty: &EnumType) -> usize {
        let width = match &ty.base {
            None => 32,
            Some((_, Some(r))) => self.range_width(r).map(|(w, _)| w).unwrap_or(1),
            Some((k, None)) => Self::kind_width(*k),
        };
        let mut members: Vec<(String, u64)> = Vec::new();
        let mut next: u64 = 0;
        for m in &ty.members {
            let value = match &m.value {
                Some(e) => match self.const_eval(e).and_then(|v| v.to_u64()) {
                    Some(v) => v,
                    None => next,
                },
                None => next,
            };
            if value & !mask(width) != 0 {
                self.error(DiagCode::Enum, m.pos, format!("value {value} of '{}' does not fit in {width} bits", m.name));
            }
            if let Some((other, _)) = members.iter().find(|(_, v)| *v == value) {
                let other = other.clone();
                self.error(DiagCode::Enum, m.pos, format!("duplicate enum value {value} for '{}'", m.name))
                    .note = Some(format!("'{other}' already has value {value}"));
            }
            next = value.wrapping_add(1);
            if self.check_fresh(&m.name, m.pos) {
                self.consts.insert(
                    m.name.clone(),
                    ConstInfo {
                        value: LogicVec::from_u64(width, value),
                        sized: true,
                    },
                );
            }
            members.push((m.name.clone(), value & mask(width)));
        }
        self.enums.push(EnumEncoding {
            name: name.map(str::to_string),
            width,
            members,
        });
        self.enums.len() - 1
    }

    fn type_width(&mut self, ty: &DataType, pos: Pos) -> (u32, i64, bool) {
        match ty {
            DataType::Net { kind, range } => {
                let (w, l) = match range {
                    Some(r) => self.range_width(r).unwrap_or((1, 0)),
                    None => (Self::kind_width(*kind), 0),
                };
                (w, l, kind.is_net() && *kind == NetKind::Wire)
            }
            DataType::Named(n) => match self.enum_types.get(n) {
                Some(&i) => (self.enums[i].width, 0, false),
                None => {
                    self.error(DiagCode::Undeclared, pos, format!("unknown type '{n}'"))
                        .note = Some("declare the type with 'typedef enum ...' before using it".into());
                    (1, 0, false)
                }
            },
            DataType::Enum(e) => {
                let i = self.declare_enum(None, e);
                (self.enums[i].width, 0, false)
            }
        }
    }

    fn declare_items(&mut self, ast: &ModuleAst) {
        for item in &ast.items {
            match item {
                Item::Param(p) => {
                    let declared = match &p.range {
                        Some(r) => self.range_width(r).map(|(w, _)| w),
                        None if p.kind != NetKind::Implicit => Some(Self::kind_width(p.kind)),
                        None => None,
                    };
                    for a in &p.assigns {
                        let value = self.const_eval(&a.value);
                        let sized = declared.is_some() || self.is_sized_expr(&a.value);
                        if self.check_fresh(&a.name, a.pos) {
                            let v = value.unwrap_or(LogicVec::all_x(1));
                            let v = match declared {
                                Some(w) => v.resize(w),
                                None => v,
                            };
                            self.consts.insert(a.name.clone(), ConstInfo { value: v, sized });
                            self.params.insert(a.name.clone(), v);
                        }
                    }
                }
                Item::TypedefEnum(t) => {
                    let i = self.declare_enum(Some(&t.name), &t.ty);
                    if self.check_fresh(&t.name, t.pos) {
                        self.enum_types.insert(t.name.clone(), i);
                    }
                }
                Item::Net(d) => {
                    let pos = d.names.first().map(|n| n.pos).unwrap_or_default();
                    let (width, lsb, is_wire) = self.type_width(&d.ty, pos);
                    for n in &d.names {
                        if !self.check_fresh(&n.name, n.pos) {
                            continue;
                        }
                        self.index.insert(n.name.clone(), self.signals.len());
                        self.signals.push(Signal {
                            name: n.name.clone(),
                            width,
                            lsb,
                            kind: SignalKind::Internal,
                            storage: Storage::Comb,
                            is_net: is_wire,
                            latch: false,
                            pos: n.pos,
                        });
                    }
                }
                Item::Assign(_) | Item::Process(_) => {}
            }
        }
    }

    fn is_sized_expr(&self, e: &Expr) -> bool {
        match &e.kind {
            ExprKind::Literal(l) => l.value().sized,
            ExprKind::Ref(n) => self.consts.get(n).is_some_and(|c| c.sized),
            _ => true,
        }
    }

    // ---- name resolution -----------------------------------------------

    fn lookup(&self, name: &str) -> Option<Resolved> {
        for scope in self.p.scopes.iter().rev() {
            if let Some(&i) = scope.get(name) {
                return Some(Resolved::Local(i));
            }
        }
        if let Some(c) = self.consts.get(name) {
            return Some(Resolved::Const(*c));
        }
        self.index.get(name).map(|&i| Resolved::Sig(i))
    }

    fn resolve(&mut self, name: &str, pos: Pos) -> Option<Resolved> {
        let r = self.lookup(name);
        let is_local = matches!(r, Some(Resolved::Local(_)));
        if !is_local {
            if let Some(decl) = self.decl_pos.get(name).copied() {
                if decl > pos && self.reported.insert(name.to_string()) {
                    self.error(DiagCode::Undeclared, pos, format!("'{name}' is used before its declaration"))
                        .note = Some(format!(
                        "declared at line {}, column {}; move the declaration above its first use",
                        decl.line, decl.column
                    ));
                }
            }
        }
        if r.is_none() && self.reported.insert(name.to_string()) {
            self.error(DiagCode::Undeclared, pos, format!("'{name}' is not declared"))
                .note = Some(format!("declare it before use, e.g. 'logic {name};'"));
        }
        r
    }

    fn resolved_width(&self, r: Resolved) -> u32 {
        match r {
            Resolved::Const(c) => c.value.width(),
            Resolved::Sig(i) => self.signals[i].width,
            Resolved::Local(i) => self.p.locals[i as usize].width,
        }
    }

    fn resolved_lsb(&self, r: Resolved) -> i64 {
        match r {
            Resolved::Const(_) => 0,
            Resolved::Sig(i) => self.signals[i].lsb,
            Resolved::Local(i) => self.p.locals[i as usize].lsb,
        }
    }

    // ---- widths --------------------------------------------------------

    /// Self-determined width; with `significant`, unsized constants count
    /// only their significant bits.
    fn width_of(&self, e: &Expr, significant: bool) -> u32 {
        let w = match &e.kind {
            ExprKind::Ref(n) => match self.lookup(n) {
                Some(Resolved::Const(c)) if significant && !c.sized => {
                    c.value.to_u64().map(min_bits).unwrap_or(c.value.width())
                }
                Some(r) => self.resolved_width(r),
                None => 1,
            },
            ExprKind::Literal(l) => {
                let v = l.value();
                if v.fill.is_some() {
                    1
                } else if significant && !v.sized {
                    v.value.to_u64().map(min_bits).unwrap_or(v.width)
                } else {
                    v.width
                }
            }
            ExprKind::BitSelect(..) => 1,
            ExprKind::PartSelect { msb, lsb, .. } => {
                match (self.peek_const(msb), self.peek_const(lsb)) {
                    (Some(m), Some(l)) if m >= l => (m - l + 1).min(64) as u32,
                    _ => 1,
                }
            }
            ExprKind::IndexedPartSelect { width, .. } => {
                self.peek_const(width).map(|w| w.clamp(1, 64) as u32).unwrap_or(1)
            }
            ExprKind::Concat(items) => items.iter().map(|i| self.width_of(i, false)).sum(),
            ExprKind::Replicate(n, items) => {
                let inner: u32 = items.iter().map(|i| self.width_of(i, false)).sum();
                let n = self.peek_const(n).unwrap_or(1).min(64) as u32;
                inner.saturating_mul(n)
            }
            ExprKind::Unary(op, a) => match op {
                UnaryOp::Not | UnaryOp::Neg | UnaryOp::Plus => self.width_of(a, significant),
                _ => 1,
            },
            ExprKind::Binary(op, a, b) => match op {
                BinaryOp::And
                | BinaryOp::Or
                | BinaryOp::Xor
                | BinaryOp::Xnor
                | BinaryOp::Add
                | BinaryOp::Sub
                | BinaryOp::Mul => self.width_of(a, significant).max(self.width_of(b, significant)),
                BinaryOp::Shl | BinaryOp::Shr => self.width_of(a, significant),
                _ => 1,
            },
            ExprKind::Ternary(_, t, f) => self.width_of(t, significant).max(self.width_of(f, significant)),
        };
        w.clamp(1, MAX_WIDTH)
    }

    /// Constant value of an expression without emitting diagnostics.
    fn peek_const(&self, e: &Expr) -> Option<u64> {
        match &e.kind {
            ExprKind::Literal(l) => l.value().value.to_u64(),
            ExprKind::Ref(n) => match self.lookup(n) {
                Some(Resolved::Const(c)) => c.value.to_u64(),
                _ => None,
            },
            ExprKind::Binary(op, a, b) => {
                let (a, b) = (self.peek_const(a)?, self.peek_const(b)?);
                Some(match op {
                    BinaryOp::Add => a.wrapping_add(b),
                    BinaryOp::Sub => a.wrapping_sub(b),
                    BinaryOp::Mul => a.wrapping_mul(b),
                    _ => return None,
                })
            }
            _ => None,
        }
    }

    fn const_eval(&mut self, e: &Expr) -> Option<LogicVec> {
        let saved = std::mem::take(&mut self.p);
        let ir = self.lower(e, 0);
        let reads_signal = !self.p.reads.is_empty();
        self.p = saved;
        match ir.try_const() {
            Some(v) if !reads_signal => Some(v),
            _ => {
                self.error(DiagCode::Const, e.pos, "expression must be a constant")
                    .note = Some("only literals, parameters and enum members may appear here".into());
                None
            }
        }
    }

    // ---- expressions ---------------------------------------------------

    fn lower(&mut self, e: &Expr, ctx: u32) -> IrExpr {
        let sw = self.width_of(e, false);
        let w = sw.max(ctx).min(MAX_WIDTH);
        match &e.kind {
            ExprKind::Literal(l) => {
                let v = l.value();
                match v.fill {
                    Some(b) => {
                        let one = LogicVec::from_bit(b);
                        let mut acc = one;
                        for _ in 1..w {
                            acc = LogicVec::concat(acc, one);
                        }
                        IrExpr::constant(acc)
                    }
                    None => IrExpr::constant(v.value.resize(w)),
                }
            }
            ExprKind::Ref(n) => match self.resolve(n, e.pos) {
                Some(Resolved::Const(c)) => IrExpr::constant(c.value).resized(w),
                Some(Resolved::Sig(i)) => {
                    self.p.reads.insert(i);
                    IrExpr {
                        kind: IrKind::Var(Var::Sig(i)),
                        width: self.signals[i].width,
                    }
                    .resized(w)
                }
                Some(Resolved::Local(i)) => IrExpr {
                    kind: IrKind::Var(Var::Local(i)),
                    width: self.p.locals[i as usize].width,
                }
                .resized(w),
                None => IrExpr::constant(LogicVec::all_x(w)),
            },
            ExprKind::BitSelect(base, idx) => {
                let s = self.lower_select(base, SelectForm::Bit(idx), e.pos);
                s.resized(w)
            }
            ExprKind::PartSelect { base, msb, lsb } => {
                let s = self.lower_select(base, SelectForm::Part(msb, lsb), e.pos);
                s.resized(w)
            }
            ExprKind::IndexedPartSelect {
                base,
                start,
                width,
                ascending,
            } => {
                let s = self.lower_select(base, SelectForm::Indexed(start, width, *ascending), e.pos);
                s.resized(w)
            }
            ExprKind::Concat(items) => {
                let parts: Vec<IrExpr> = items.iter().map(|i| self.lower_concat_item(i)).collect();
                let total: u32 = parts.iter().map(|p| p.width).sum::<u32>().clamp(1, MAX_WIDTH);
                IrExpr {
                    kind: IrKind::Concat(parts),
                    width: total,
                }
                .resized(w)
            }
            ExprKind::Replicate(n, items) => {
                let count = self.const_eval(n).and_then(|v| v.to_u64()).unwrap_or(1);
                if count == 0 {
                    self.error(DiagCode::Const, n.pos, "replication count must be positive");
                }
                let parts: Vec<IrExpr> = items.iter().map(|i| self.lower_concat_item(i)).collect();
                let mut all = Vec::new();
                for _ in 0..count.clamp(1, 64) {
                    all.extend(parts.iter().cloned());
                }
                let total: u32 = all.iter().map(|p| p.width).sum::<u32>().clamp(1, MAX_WIDTH);
                IrExpr {
                    kind: IrKind::Concat(all),
                    width: total,
                }
                .resized(w)
            }
            ExprKind::Unary(op, a) => match op {
                UnaryOp::Plus => self.lower(a, w),
                UnaryOp::Not | UnaryOp::Neg => {
                    let a = self.lower(a, w);
                    let op = if *op == UnaryOp::Not { ir::UnOp::Not } else { ir::UnOp::Neg };
                    IrExpr {
                        kind: IrKind::Unary(op, Box::new(a)),
                        width: w,
                    }
                }
                _ => {
                    let a = self.lower(a, 0);
                    let (op, invert) = match op {
                        UnaryOp::LogicNot => (ir::UnOp::LogicNot, false),
                        UnaryOp::ReduceAnd => (ir::UnOp::ReduceAnd, false),
                        UnaryOp::ReduceOr => (ir::UnOp::ReduceOr, false),
                        UnaryOp::ReduceXor => (ir::UnOp::ReduceXor, false),
                        UnaryOp::ReduceNand => (ir::UnOp::ReduceAnd, true),
                        UnaryOp::ReduceNor => (ir::UnOp::ReduceOr, true),
                        _ => (ir::UnOp::ReduceXor, true),
                    };
                    let mut r = IrExpr {
                        kind: IrKind::Unary(op, Box::new(a)),
                        width: 1,
                    };
                    if invert {
                        r = IrExpr {
                            kind: IrKind::Unary(ir::UnOp::Not, Box::new(r)),
                            width: 1,
                        };
                    }
                    r.resized(w)
                }
            },
            ExprKind::Binary(op, a, b) => self.lower_binary(*op, a, b, w, e.pos),
            ExprKind::Ternary(c, t, f) => {
                let c = self.lower(c, 0);
                let t = self.lower(t, w);
                let f = self.lower(f, w);
                if let Some(cv) = c.as_const() {
                    match cv.truth() {
                        crate::logic::BitVal::One => return t,
                        crate::logic::BitVal::Zero => return f,
                        crate::logic::BitVal::X => {}
                    }
                }
                IrExpr {
                    kind: IrKind::Ternary(Box::new(c), Box::new(t), Box::new(f)),
                    width: w,
                }
            }
        }
    }

    fn lower_concat_item(&mut self, e: &Expr) -> IrExpr {
        if let ExprKind::Literal(l) = &e.kind {
            let v = l.value();
            if !v.sized {
                self.error(DiagCode::Width, e.pos, format!("unsized constant '{}' in concatenation", l.text))
                    .note = Some("give the constant an explicit width, e.g. 1'b0".into());
            }
        }
        self.lower(e, 0)
    }

    fn lower_binary(&mut self, op: BinaryOp, a: &Expr, b: &Expr, w: u32, pos: Pos) -> IrExpr {
        use BinaryOp::*;
        let node = |op, x: IrExpr, y: IrExpr, width| IrExpr {
            kind: IrKind::Binary(op, Box::new(x), Box::new(y)),
            width,
        };
        let r = match op {
            And | Or | Xor | Xnor | Add | Sub | Mul => {
                let x = self.lower(a, w);
                let y = self.lower(b, w);
                node(op, x, y, w)
            }
            Shl | Shr => {
                let x = self.lower(a, w);
                let y = self.lower(b, 0);
                node(op, x, y, w)
            }
            LogicAnd | LogicOr => {
                let x = self.lower(a, 0);
                let y = self.lower(b, 0);
                node(op, x, y, 1).resized(w)
            }
            Eq | Ne | CaseEq | CaseNe | Lt | Le | Gt | Ge => {
                self.check_comparison(op, a, b, pos);
                let cw = self.width_of(a, false).max(self.width_of(b, false));
                let x = self.lower(a, cw);
                let y = self.lower(b, cw);
                node(op, x, y, 1).resized(w)
            }
        };
        match r.try_const() {
            Some(v) => IrExpr::constant(v),
            None => r,
        }
    }

    /// A sized literal whose set bits lie beyond the other operand's width
    /// makes an equality test constant.
    fn check_comparison(&mut self, op: BinaryOp, a: &Expr, b: &Expr, pos: Pos) {
        if !matches!(op, BinaryOp::Eq | BinaryOp::Ne) {
            return;
        }
        for (lit, other) in [(a, b), (b, a)] {
            let ExprKind::Literal(l) = &lit.kind else { continue };
            if matches!(other.kind, ExprKind::Literal(_)) {
                continue;
            }
            let v = l.value();
            if !v.sized || v.fill.is_some() {
                continue;
            }
            let ow = self.width_of(other, false);
            if v.width > ow && v.value.raw_bits() & !mask(ow) != 0 {
                let always = if op == BinaryOp::Eq { "false" } else { "true" };
                self.error(
                    DiagCode::Width,
                    pos,
                    format!("comparison of {ow}-bit operand with {} is always {always}", l.text),
                )
                .note = Some(format!("the constant needs more than {ow} bits"));
            }
        }
    }

    fn lower_select(&mut self, base: &Expr, form: SelectForm<'_>, pos: Pos) -> IrExpr {
        let ExprKind::Ref(name) = &base.kind else {
            self.error(DiagCode::Syntax, base.pos, "select applies only to a named signal");
            return IrExpr::constant(LogicVec::all_x(1));
        };
        let Some(r) = self.resolve(name, base.pos) else {
            return IrExpr::constant(LogicVec::all_x(1));
        };
        let bw = self.resolved_width(r);
        let lsb = self.resolved_lsb(r);
        let base_ir = match r {
            Resolved::Const(c) => IrExpr::constant(c.value),
            Resolved::Sig(i) => {
                self.p.reads.insert(i);
                IrExpr {
                    kind: IrKind::Var(Var::Sig(i)),
                    width: bw,
                }
            }
            Resolved::Local(i) => IrExpr {
                kind: IrKind::Var(Var::Local(i)),
                width: bw,
            },
        };
        let (width, start) = self.select_geometry(form, lsb, pos);
        let width = width.clamp(1, MAX_WIDTH);
        match start {
            SelStart::Const(lo) => {
                if lo < 0 || lo + width as i64 > bw as i64 {
                    self.warn(DiagCode::Width, pos, format!("select is outside the {bw}-bit range of '{name}'"))
                        .note = Some("out-of-range bits read as X".into());
                }
                if lo >= 0 && lo + width as i64 <= bw as i64 {
                    IrExpr {
                        kind: IrKind::Slice {
                            base: Box::new(base_ir),
                            lo: lo as u32,
                        },
                        width,
                    }
                } else {
                    IrExpr {
                        kind: IrKind::DynSlice {
                            base: Box::new(base_ir),
                            index: Box::new(IrExpr::constant(LogicVec::zero(1))),
                            bias: lo,
                        },
                        width,
                    }
                }
            }
            SelStart::Dyn(index, bias) => IrExpr {
                kind: IrKind::DynSlice {
                    base: Box::new(base_ir),
                    index: Box::new(index),
                    bias,
                },
                width,
            },
            SelStart::Unknown => IrExpr::constant(LogicVec::all_x(width)),
        }
    }

    /// Width and starting bit (relative to bit 0 of the storage) of a select.
    fn select_geometry(&mut self, form: SelectForm<'_>, lsb: i64, pos: Pos) -> (u32, SelStart) {
        match form {
            SelectForm::Bit(idx) => {
                let i = self.lower(idx, 0);
                match i.as_const().or_else(|| i.try_const()) {
                    Some(v) => match v.to_u64() {
                        Some(v) => (1, SelStart::Const(v as i64 - lsb)),
                        None => (1, SelStart::Unknown),
                    },
                    None => (1, SelStart::Dyn(i, -lsb)),
                }
            }
            SelectForm::Part(msb, l) => {
                let m = self.const_eval(msb).and_then(|v| v.to_u64());
                let l = self.const_eval(l).and_then(|v| v.to_u64());
                match (m, l) {
                    (Some(m), Some(l)) if m >= l => {
                        ((m - l + 1).min(64) as u32, SelStart::Const(l as i64 - lsb))
                    }
                    (Some(m), Some(l)) => {
                        self.error(DiagCode::Width, pos, format!("part-select [{m}:{l}] is reversed"));
                        (1, SelStart::Unknown)
                    }
                    _ => (1, SelStart::Unknown),
                }
            }
            SelectForm::Indexed(start, width, ascending) => {
                let w = match self.const_eval(width).and_then(|v| v.to_u64()) {
                    Some(w) if w >= 1 => w.min(64) as u32,
                    _ => {
                        self.error(DiagCode::Const, width.pos, "indexed part-select width must be a positive constant");
                        return (1, SelStart::Unknown);
                    }
                };
                let back = if ascending { 0 } else { w as i64 - 1 };
                let s = self.lower(start, 0);
                match s.try_const() {
                    Some(v) => match v.to_u64() {
                        Some(v) => (w, SelStart::Const(v as i64 - back - lsb)),
                        None => (w, SelStart::Unknown),
                    },
                    None => (w, SelStart::Dyn(s, -back - lsb)),
                }
            }
        }
    }

    // ---- assignment targets --------------------------------------------

    fn lower_lvalue(&mut self, e: &Expr) -> Option<LValueOut> {
        match &e.kind {
            ExprKind::Concat(items) => {
                let mut parts = Vec::new();
                for it in items {
                    let lv = self.lower_lvalue(it)?;
                    parts.extend(lv.parts);
                }
                let width = parts.iter().map(|p: &ir::LvPart| p.width).sum::<u32>().clamp(1, MAX_WIDTH);
                Some(LValueOut { parts, width })
            }
            ExprKind::Ref(name) => {
                let var = self.target_var(name, e.pos)?;
                let width = self.var_width(var);
                self.record_drive(var, mask(width), e.pos);
                Some(LValueOut {
                    parts: vec![ir::LvPart {
                        var,
                        sel: ir::LvSel::Full,
                        width,
                    }],
                    width,
                })
            }
            ExprKind::BitSelect(base, _)
            | ExprKind::PartSelect { base, .. }
            | ExprKind::IndexedPartSelect { base, .. } => {
                let ExprKind::Ref(name) = &base.kind else {
                    self.error(DiagCode::Target, e.pos, "invalid assignment target");
                    return None;
                };
                let var = self.target_var(name, base.pos)?;
                let vw = self.var_width(var);
                let lsb = match var {
                    Var::Sig(i) => self.signals[i].lsb,
                    Var::Local(i) => self.p.locals[i as usize].lsb,
                };
                let form = match &e.kind {
                    ExprKind::BitSelect(_, i) => SelectForm::Bit(i),
                    ExprKind::PartSelect { msb, lsb, .. } => SelectForm::Part(msb, lsb),
                    ExprKind::IndexedPartSelect {
                        start,
                        width,
                        ascending,
                        ..
                    } => SelectForm::Indexed(start, width, *ascending),
                    _ => unreachable!(),
                };
                let (width, start) = self.select_geometry(form, lsb, e.pos);
                let (sel, m) = match start {
                    SelStart::Const(lo) => {
                        if lo < 0 || lo + width as i64 > vw as i64 {
                            self.warn(DiagCode::Width, e.pos, format!("assignment outside the {vw}-bit range of '{name}'"));
                        }
                        if lo >= 0 {
                            let m = (mask(width) << lo.min(63)) & mask(vw);
                            (ir::LvSel::Const { lo: lo as u32 }, if lo >= 64 { 0 } else { m })
                        } else {
                            (
                                ir::LvSel::Dyn {
                                    index: IrExpr::constant(LogicVec::zero(1)),
                                    bias: lo,
                                },
                                mask(vw),
                            )
                        }
                    }
                    SelStart::Dyn(index, bias) => (ir::LvSel::Dyn { index, bias }, mask(vw)),
                    SelStart::Unknown => (
                        ir::LvSel::Dyn {
                            index: IrExpr::constant(LogicVec::all_x(1)),
                            bias: 0,
                        },
                        mask(vw),
                    ),
                };
                self.record_drive(var, m, e.pos);
                Some(LValueOut {
                    parts: vec![ir::LvPart { var, sel, width }],
                    width,
                })
            }
            _ => {
                self.error(DiagCode::Target, e.pos, "invalid assignment target")
                    .note = Some("assign to a declared variable, a bit/part-select of one, or a concatenation of those".into());
                None
            }
        }
    }

    fn var_width(&self, v: Var) -> u32 {
        match v {
            Var::Sig(i) => self.signals[i].width,
            Var::Local(i) => self.p.locals[i as usize].width,
        }
    }

    fn record_drive(&mut self, v: Var, m: u64, pos: Pos) {
        if let Var::Sig(i) = v {
            *self.p.drives.entry(i).or_insert(0) |= m;
            self.p.drive_pos.entry(i).or_insert(pos);
        }
    }

    fn target_var(&mut self, name: &str, pos: Pos) -> Option<Var> {
        let class = self.p.class.unwrap_or(ProcClass::Comb);
        if class == ProcClass::Assign && self.lookup(name).is_none() && !self.decl_pos.contains_key(name) {
            // Implicit net for a continuous assignment target.
            self.warn(DiagCode::Undeclared, pos, format!("implicit 1-bit net '{name}'"))
                .note = Some(format!("declare it explicitly, e.g. 'logic {name};'"));
            self.decl_pos.insert(name.to_string(), pos);
            self.index.insert(name.to_string(), self.signals.len());
            self.signals.push(Signal {
                name: name.to_string(),
                width: 1,
                lsb: 0,
                kind: SignalKind::Internal,
                storage: Storage::Comb,
                is_net: true,
                latch: false,
                pos,
            });
        }
        match self.resolve(name, pos)? {
            Resolved::Local(i) => Some(Var::Local(i)),
            Resolved::Const(_) => {
                self.error(DiagCode::Target, pos, format!("cannot assign to constant '{name}'"));
                None
            }
            Resolved::Sig(i) => {
                let s = &self.signals[i];
                if s.kind == SignalKind::Input {
                    self.error(DiagCode::Target, pos, format!("cannot assign to input port '{name}'"));
                    return None;
                }
                if class != ProcClass::Assign && s.is_net {
                    let port = s.kind == SignalKind::Output;
                    self.error(DiagCode::Target, pos, format!("procedural assignment to net '{name}'"))
                        .note = Some(if port {
                        format!("declare the port with a variable type, e.g. 'output logic {name}'")
                    } else {
                        format!("declare it as a variable, e.g. 'logic {name};'")
                    });
                    return None;
                }
                Some(Var::Sig(i))
            }
        }
    }

    // ---- statements ----------------------------------------------------

    fn lower_stmts(&mut self, s: &Stmt, out: &mut Vec<IrStmt>) {
        match s {
            Stmt::Null => {}
            Stmt::Block { decls, stmts, .. } => {
                self.p.scopes.push(HashMap::new());
                for d in decls {
                    let pos = d.names.first().map(|n| n.pos).unwrap_or_default();
                    let (width, lsb, _) = self.type_width(&d.ty, pos);
                    for n in &d.names {
                        if n.init.is_some() {
                            self.error(DiagCode::Unsupported, n.pos, "unsupported construct: variable initializer")
                                .note = Some("assign the value in the block body instead".into());
                        }
                        let idx = self.p.locals.len() as u32;
                        self.p.locals.push(LocalVar {
                            name: n.name.clone(),
                            width,
                            lsb,
                        });
                        let scope = self.p.scopes.last_mut().unwrap();
                        if scope.insert(n.name.clone(), idx).is_some() {
                            self.error(DiagCode::Redeclared, n.pos, format!("'{}' is already declared in this block", n.name));
                        }
                    }
                }
                for st in stmts {
                    self.lower_stmts(st, out);
                }
                self.p.scopes.pop();
            }
            Stmt::If {
                cond, then, els, ..
            } => {
                let c = self.lower(cond, 0);
                let mut t = Vec::new();
                self.lower_stmts(then, &mut t);
                let mut f = Vec::new();
                if let Some(e) = els {
                    self.lower_stmts(e, &mut f);
                }
                out.push(IrStmt::If {
                    cond: c,
                    then: t,
                    els: f,
                });
            }
            Stmt::Case {
                kind,
                selector,
                arms,
                default,
                ..
            } => {
                let mut cw = self.width_of(selector, false);
                for a in arms {
                    for l in &a.labels {
                        cw = cw.max(self.width_of(l, false));
                    }
                }
                let sel = self.lower(selector, cw);
                let mut ir_arms = Vec::new();
                for a in arms {
                    let mut labels = Vec::new();
                    for l in &a.labels {
                        let wildcard = match (&l.kind, kind) {
                            (ExprKind::Literal(lit), CaseKind::Casez) => {
                                let v = lit.value();
                                v.wildcard & mask(v.width)
                            }
                            _ => 0,
                        };
                        labels.push(ir::CaseLabel {
                            value: self.lower(l, cw),
                            wildcard,
                        });
                    }
                    let mut body = Vec::new();
                    self.lower_stmts(&a.body, &mut body);
                    ir_arms.push(ir::IrArm { labels, body });
                }
                let default = default.as_ref().map(|d| {
                    let mut body = Vec::new();
                    self.lower_stmts(d, &mut body);
                    body
                });
                out.push(IrStmt::Case {
                    selector: sel,
                    arms: ir_arms,
                    default,
                });
            }
            Stmt::Blocking { lhs, rhs, pos } | Stmt::Nonblocking { lhs, rhs, pos } => {
                let nonblocking = matches!(s, Stmt::Nonblocking { .. });
                if let Some(stmt) = self.lower_assign(lhs, rhs, *pos, nonblocking) {
                    out.push(stmt);
                }
            }
        }
    }

    fn lower_assign(&mut self, lhs: &Expr, rhs: &Expr, pos: Pos, nonblocking: bool) -> Option<IrStmt> {
        let target = self.lower_lvalue(lhs);
        let tw = target.as_ref().map(|t| t.width).unwrap_or(1);
        let value = self.lower(rhs, tw);
        let target = target?;
        let sig = self.width_of(rhs, true);
        if sig > tw {
            self.warn(DiagCode::Width, pos, format!("assignment truncates a {sig}-bit value to {tw} bits"));
        }
        Some(IrStmt::Assign {
            target: ir::LValue {
                parts: target.parts,
                width: tw,
            },
            value: value.resized(tw),
            nonblocking,
            pos,
        })
    }

    // ---- processes -----------------------------------------------------

    fn begin_proc(&mut self, class: ProcClass) {
        self.p = ProcState {
            class: Some(class),
            ..ProcState::default()
        };
    }

    fn end_proc(
        &mut self,
        source: Option<ProcessKind>,
        sensitivity: Vec<SensEntry>,
        clock: Option<SigId>,
        body: Vec<IrStmt>,
        first_guard: Option<ResetGuard>,
        pos: Pos,
    ) {
        let p = std::mem::take(&mut self.p);
        let mut reads = p.reads;
        for st in &body {
            collect_index_reads(st, &mut reads);
        }
        self.procs.push(Proc {
            class: p.class.unwrap(),
            source,
            sensitivity,
            clock,
            body,
            locals: p.locals,
            drives: p.drives,
            reads,
            first_guard,
            pos,
        });
        self.proc_sites.push(p.drive_pos);
    }

    fn lower_items(&mut self, ast: &ModuleAst) {
        for item in &ast.items {
            match item {
                Item::Net(d) => {
                    for n in &d.names {
                        let Some(init) = &n.init else { continue };
                        let is_net = self.index.get(&n.name).map(|&i| self.signals[i].is_net).unwrap_or(false);
                        if !is_net {
                            self.error(DiagCode::Unsupported, n.pos, "unsupported construct: variable initializer")
                                .note = Some("use a separate continuous assignment or reset logic".into());
                            continue;
                        }
                        let lhs = Expr::new(ExprKind::Ref(n.name.clone()), n.pos);
                        self.begin_proc(ProcClass::Assign);
                        let body: Vec<IrStmt> = self.lower_assign(&lhs, init, n.pos, false).into_iter().collect();
                        self.end_proc(None, Vec::new(), None, body, None, n.pos);
                    }
                }
                Item::Assign(a) => {
                    self.begin_proc(ProcClass::Assign);
                    let body: Vec<IrStmt> = self.lower_assign(&a.lhs, &a.rhs, a.pos, false).into_iter().collect();
                    self.end_proc(None, Vec::new(), None, body, None, a.pos);
                }
                Item::Process(p) => self.lower_process(p),
                _ => {}
            }
        }
    }

    fn lower_process(&mut self, p: &Process) {
        let edges: Vec<&Sensitivity> = p.sensitivity.iter().filter(|s| s.edge != Edge::Level).collect();
        let levels = p.sensitivity.len() - edges.len();
        let class = match p.kind {
            ProcessKind::AlwaysComb | ProcessKind::AlwaysStar => ProcClass::Comb,
            _ if !edges.is_empty() && levels > 0 => {
                self.error(DiagCode::Clock, p.pos, "event list mixes edge and level events")
                    .note = Some("use '@(posedge clk)' for sequential logic and 'always_comb' for combinational logic".into());
                return;
            }
            ProcessKind::AlwaysFf if edges.is_empty() => {
                self.error(DiagCode::Clock, p.pos, "always_ff requires edge events");
                return;
            }
            _ if edges.is_empty() => ProcClass::Comb,
            _ => ProcClass::Edge,
        };
        self.begin_proc(class);
        let mut sens = Vec::new();
        let mut clock = None;
        let mut guard = None;
        if class == ProcClass::Edge {
            for s in &edges {
                if let Some(Resolved::Sig(i)) = self.resolve(&s.signal, s.pos) {
                    sens.push(SensEntry {
                        signal: i,
                        edge: s.edge,
                    });
                } else if self.lookup(&s.signal).is_some() {
                    self.error(DiagCode::Clock, s.pos, format!("'{}' is not a signal", s.signal));
                }
            }
            let tested = first_if_refs(&p.body);
            let clocks: Vec<&SensEntry> = sens
                .iter()
                .filter(|s| !tested.contains(self.signals[s.signal].name.as_str()))
                .collect();
            if sens.len() == 1 {
                clock = Some(sens[0].signal);
            } else if clocks.len() == 1 {
                clock = Some(clocks[0].signal);
            } else if !sens.is_empty() {
                let names: Vec<&str> = sens.iter().map(|s| self.signals[s.signal].name.as_str()).collect();
                let msg = format!("cannot identify the clock among {}", names.join(", "));
                self.error(DiagCode::Clock, p.pos, msg)
                    .note = Some("asynchronous controls must be tested by the first 'if' of the block".into());
            }
            guard = self.first_guard(&p.body);
        }
        let mut body = Vec::new();
        self.lower_stmts(&p.body, &mut body);
        self.end_proc(Some(p.kind), sens, clock, body, guard, p.pos);
    }

    fn first_guard(&self, body: &Stmt) -> Option<ResetGuard> {
        let Stmt::If { cond, .. } = first_stmt(body)? else {
            return None;
        };
        let (name, active_high) = guard_signal(cond)?;
        match self.lookup(name)? {
            Resolved::Sig(i) => Some(ResetGuard {
                signal: i,
                active_high,
            }),
            _ => None,
        }
    }

    // ---- whole-design checks -------------------------------------------

    fn finish(mut self, ast: &ModuleAst) -> Result<Design, Vec<Diagnostic>> {
        // Storage and latch inference.
        for (pi, p) in self.procs.iter().enumerate() {
            for &s in p.drives.keys() {
                if p.class == ProcClass::Edge {
                    self.signals[s].storage = Storage::Register;
                }
            }
            if p.class == ProcClass::Comb {
                let definite = definite_assign(&p.body);
                for (&s, &m) in &p.drives {
                    if definite.get(&s).copied().unwrap_or(0) & m != m {
                        self.signals[s].latch = true;
                    }
                }
            }
            let _ = pi;
        }

        // Driver map and multi-driver detection.
        let mut drivers: BTreeMap<SigId, Vec<DriverSite>> = BTreeMap::new();
        for (pi, p) in self.procs.iter().enumerate() {
            for (&s, &m) in &p.drives {
                let pos = self.proc_sites[pi].get(&s).copied().unwrap_or(p.pos);
                drivers.entry(s).or_default().push(DriverSite {
                    process: pi,
                    mask: m,
                    pos,
                });
            }
        }
        let mut multi = Vec::new();
        for (&s, sites) in &drivers {
            let mut acc: Vec<&DriverSite> = Vec::new();
            let mut conflict = None;
            for site in sites {
                let overlap = acc.iter().find(|a| a.mask & site.mask != 0);
                let mixed = acc.iter().find(|a| {
                    (self.procs[a.process].class == ProcClass::Edge)
                        != (self.procs[site.process].class == ProcClass::Edge)
                });
                if let Some(prev) = overlap.or(mixed) {
                    conflict = Some((prev.pos, site.pos));
                    break;
                }
                acc.push(site);
            }
            if let Some((first, second)) = conflict {
                multi.push((s, first, second));
            }
        }
        for (s, first, second) in multi {
            let name = self.signals[s].name.clone();
            self.error(
                DiagCode::MultiDriver,
                second,
                format!("'{name}' is driven from more than one always block or assignment"),
            )
            .note = Some(format!(
                "drivers at line {} and line {}; assign each signal in exactly one block",
                first.line, second.line
            ));
        }

        // Single clock.
        let mut clock: Option<SigId> = None;
        let mut clock_conflict = None;
        for p in &self.procs {
            if let Some(c) = p.clock {
                match clock {
                    None => clock = Some(c),
                    Some(prev) if prev != c => clock_conflict = Some((prev, c, p.pos)),
                    _ => {}
                }
            }
        }
        if let Some((a, b, pos)) = clock_conflict {
            let (a, b) = (self.signals[a].name.clone(), self.signals[b].name.clone());
            self.error(DiagCode::Clock, pos, format!("design uses more than one clock ('{a}' and '{b}')"));
        }

        // Reset candidates.
        let mut resets: Vec<ResetInfo> = Vec::new();
        for p in &self.procs {
            if p.class != ProcClass::Edge {
                continue;
            }
            for s in &p.sensitivity {
                if Some(s.signal) != p.clock {
                    let info = ResetInfo {
                        signal: self.signals[s.signal].name.clone(),
                        style: ResetStyle::Asynchronous,
                        active_high: s.edge == Edge::Pos,
                    };
                    if !resets.contains(&info) {
                        resets.push(info);
                    }
                }
            }
            if let Some(g) = p.first_guard {
                let in_sens = p.sensitivity.iter().any(|s| s.signal == g.signal);
                if !in_sens && self.signals[g.signal].kind == SignalKind::Input {
                    let info = ResetInfo {
                        signal: self.signals[g.signal].name.clone(),
                        style: ResetStyle::Synchronous,
                        active_high: g.active_high,
                    };
                    if !resets.contains(&info) {
                        resets.push(info);
                    }
                }
            }
        }

        let (comb_order, comb_cyclic) = comb_schedule(&self.procs);

        if has_errors(&self.diags) {
            return Err(self.diags);
        }
        Ok(Design {
            name: ast.name.clone(),
            signals: self.signals,
            processes: self.procs,
            drivers,
            clock,
            resets,
            enums: self.enums,
            params: self.params,
            comb_order,
            comb_cyclic,
            warnings: self.diags,
        })
    }
}

struct LValueOut {
    parts: Vec<ir::LvPart>,
    width: u32,
}

#[derive(Clone, Copy)]
enum SelectForm<'a> {
    Bit(&'a Expr),
    Part(&'a Expr, &'a Expr),
    Indexed(&'a Expr, &'a Expr, bool),
}

enum SelStart {
    Const(i64),
    Dyn(IrExpr, i64),
    Unknown,
}

fn collect_index_reads(s: &IrStmt, reads: &mut BTreeSet<SigId>) {
    fn add(e: &IrExpr, reads: &mut BTreeSet<SigId>) {
        e.for_each_var(&mut |v| {
            if let Var::Sig(i) = v {
                reads.insert(i);
            }
        })
    }
    match s {
        IrStmt::Assign { target, value, .. } => {
            add(value, reads);
            for p in &target.parts {
                if let ir::LvSel::Dyn { index, .. } = &p.sel {
                    add(index, reads);
                }
            }
        }
        IrStmt::If { cond, then, els } => {
            add(cond, reads);
            then.iter().chain(els).for_each(|s| collect_index_reads(s, reads));
        }
        IrStmt::Case {
            selector,
            arms,
            default,
        } => {
            add(selector, reads);
            for a in arms {
                a.labels.iter().for_each(|l| add(&l.value, reads));
                a.body.iter().for_each(|s| collect_index_reads(s, reads));
            }
            if let Some(d) = default {
                d.iter().for_each(|s| collect_index_reads(s, reads));
            }
        }
    }
}

/// First statement executed by a process body, looking through blocks.
pub(crate) fn first_stmt(s: &Stmt) -> Option<&Stmt> {
    match s {
        Stmt::Block { stmts, .. } => stmts.first().and_then(first_stmt),
        Stmt::Null => None,
        other => Some(other),
    }
}

/// Names referenced by the conditions of the leading if/else-if chain.
fn first_if_refs(body: &Stmt) -> HashSet<String> {
    let mut out = HashSet::new();
    let mut cur = first_stmt(body);
    while let Some(Stmt::If { cond, els, .. }) = cur {
        cond.for_each_ref(&mut |n, _| {
            out.insert(n.to_string());
        });
        cur = els.as_deref().and_then(first_stmt);
    }
    out
}

/// Recognizes `r`, `!r`, `~r`, `r == 1`, `r == 0`, `r != 0`.
fn guard_signal(e: &Expr) -> Option<(&str, bool)> {
    match &e.kind {
        ExprKind::Ref(n) => Some((n, true)),
        ExprKind::Unary(UnaryOp::LogicNot | UnaryOp::Not, a) => {
            let (n, high) = guard_signal(a)?;
            Some((n, !high))
        }
        ExprKind::Binary(op @ (BinaryOp::Eq | BinaryOp::Ne | BinaryOp::CaseEq | BinaryOp::CaseNe), a, b) => {
            let (r, lit) = match (&a.kind, &b.kind) {
                (ExprKind::Ref(_), ExprKind::Literal(l)) => (a, l),
                (ExprKind::Literal(l), ExprKind::Ref(_)) => (b, l),
                _ => return None,
            };
            let ExprKind::Ref(n) = &r.kind else { return None };
            let v = lit.value().value.to_u64()?;
            let eq = matches!(op, BinaryOp::Eq | BinaryOp::CaseEq);
            match v {
                1 => Some((n, eq)),
                0 => Some((n, !eq)),
                _ => None,
            }
        }
        _ => None,
    }
}

/// Bits of each signal assigned on every path through `stmts`.
fn definite_assign(stmts: &[IrStmt]) -> BTreeMap<SigId, u64> {
    let mut acc: BTreeMap<SigId, u64> = BTreeMap::new();
    for s in stmts {
        let add = match s {
            IrStmt::Assign { target, .. } => {
                let mut m = BTreeMap::new();
                for p in &target.parts {
                    if let Var::Sig(i) = p.var {
                        let bits = match &p.sel {
                            ir::LvSel::Full => mask(p.width),
                            ir::LvSel::Const { lo } if *lo < 64 => mask(p.width) << lo,
                            _ => 0,
                        };
                        *m.entry(i).or_insert(0) |= bits;
                    }
                }
                m
            }
            IrStmt::If { then, els, .. } => intersect(&definite_assign(then), &definite_assign(els)),
            IrStmt::Case {
                selector,
                arms,
                default,
            } => {
                let mut branches: Vec<BTreeMap<SigId, u64>> =
                    arms.iter().map(|a| definite_assign(&a.body)).collect();
                match default {
                    Some(d) => branches.push(definite_assign(d)),
                    None if !case_is_complete(selector.width, arms) => branches.push(BTreeMap::new()),
                    None => {}
                }
                let mut it = branches.into_iter();
                match it.next() {
                    Some(first) => it.fold(first, |a, b| intersect(&a, &b)),
                    None => BTreeMap::new(),
                }
            }
        };
        for (k, v) in add {
            *acc.entry(k).or_insert(0) |= v;
        }
    }
    acc
}

fn intersect(a: &BTreeMap<SigId, u64>, b: &BTreeMap<SigId, u64>) -> BTreeMap<SigId, u64> {
    a.iter()
        .filter_map(|(k, v)| b.get(k).map(|w| (*k, v & w)))
        .filter(|(_, v)| *v != 0)
        .collect()
}

/// True when constant labels cover every value of a narrow selector.
fn case_is_complete(width: u32, arms: &[ir::IrArm]) -> bool {
    if width > 12 {
        return false;
    }
    let mut labels = Vec::new();
    for a in arms {
        for l in &a.labels {
            match l.value.as_const() {
                Some(v) => labels.push((v, l.wildcard)),
                None => return false,
            }
        }
    }
    struct NoEnv;
    impl ir::Env for NoEnv {
        fn read(&self, _: Var) -> LogicVec {
            unreachable!()
        }
    }
    (0..(1u64 << width)).all(|v| {
        let sel = LogicVec::from_u64(width, v);
        labels.iter().any(|(lv, wc)| {
            ir::CaseLabel {
                value: IrExpr::constant(*lv),
                wildcard: *wc,
            }
            .matches(sel, &NoEnv)
        })
    })
}

/// Orders combinational processes so producers run before consumers. Nodes
/// left over by the topological sort are reported as cyclic.
fn comb_schedule(procs: &[Proc]) -> (Vec<usize>, BTreeSet<usize>) {
    let comb: Vec<usize> = (0..procs.len())
        .filter(|&i| procs[i].class != ProcClass::Edge)
        .collect();
    let mut indeg: BTreeMap<usize, usize> = comb.iter().map(|&i| (i, 0)).collect();
    let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &a in &comb {
        for &b in &comb {
            if a != b && procs[a].drives.keys().any(|s| procs[b].reads.contains(s)) {
                succ.entry(a).or_default().push(b);
                *indeg.get_mut(&b).unwrap() += 1;
            }
        }
    }
    let mut ready: BTreeSet<usize> = indeg.iter().filter(|(_, d)| **d == 0).map(|(k, _)| *k).collect();
    let mut order = Vec::new();
    while let Some(&n) = ready.iter().next() {
        ready.remove(&n);
        order.push(n);
        for &m in succ.get(&n).map(Vec::as_slice).unwrap_or(&[]) {
            let d = indeg.get_mut(&m).unwrap();
            *d -= 1;
            if *d == 0 {
                ready.insert(m);
            }
        }
    }
    let cyclic: BTreeSet<usize> = comb.iter().copied().filter(|i| !order.contains(i)).collect();
    order.extend(cyclic.iter().copied());
    (order, cyclic)
}
