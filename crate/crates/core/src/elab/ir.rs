//! Width-resolved expression and statement IR shared by the simulator and
//! the golden-model guard evaluator.

use serde::{Deserialize, Serialize};

use crate::logic::{BitVal, LogicVec};
use crate::sv::ast::{BinaryOp, Pos};

pub type SigId = usize;

/// A storage location: a module signal or a process-local variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    Sig(SigId),
    Local(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnOp {
    Not,
    Neg,
    LogicNot,
    ReduceAnd,
    ReduceOr,
    ReduceXor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrExpr {
    pub kind: IrKind,
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum IrKind {
    Const(LogicVec),
    Var(Var),
    /// Constant slice `[lo + width - 1 : lo]` of `base`.
    Slice { base: Box<IrExpr>, lo: u32 },
    /// Slice starting at bit `index + bias`.
    DynSlice {
        base: Box<IrExpr>,
        index: Box<IrExpr>,
        bias: i64,
    },
    Unary(UnOp, Box<IrExpr>),
    /// Operands of bitwise and arithmetic operators already share a width.
    Binary(BinaryOp, Box<IrExpr>, Box<IrExpr>),
    Ternary(Box<IrExpr>, Box<IrExpr>, Box<IrExpr>),
    /// Most significant part first.
    Concat(Vec<IrExpr>),
    /// Zero-extends or truncates the operand to `width`.
    Resize(Box<IrExpr>),
}

impl IrExpr {
    pub fn constant(v: LogicVec) -> Self {
        IrExpr {
            width: v.width(),
            kind: IrKind::Const(v),
        }
    }

    pub fn resized(self, width: u32) -> Self {
        if self.width == width {
            return self;
        }
        if let IrKind::Const(v) = &self.kind {
            return IrExpr::constant(v.resize(width));
        }
        IrExpr {
            kind: IrKind::Resize(Box::new(self)),
            width,
        }
    }

    pub fn as_const(&self) -> Option<LogicVec> {
        match &self.kind {
            IrKind::Const(v) => Some(*v),
            _ => None,
        }
    }

    /// Evaluates the expression when it reads no variables.
    pub fn try_const(&self) -> Option<LogicVec> {
        if self.reads_any() {
            None
        } else {
            Some(eval(self, &NoVars))
        }
    }

    fn reads_any(&self) -> bool {
        let mut any = false;
        self.for_each_var(&mut |_| any = true);
        any
    }

    pub fn for_each_var(&self, f: &mut impl FnMut(Var)) {
        match &self.kind {
            IrKind::Const(_) => {}
            IrKind::Var(v) => f(*v),
            IrKind::Slice { base, .. } => base.for_each_var(f),
            IrKind::DynSlice { base, index, .. } => {
                base.for_each_var(f);
                index.for_each_var(f);
            }
            IrKind::Unary(_, a) | IrKind::Resize(a) => a.for_each_var(f),
            IrKind::Binary(_, a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            IrKind::Ternary(c, t, e) => {
                c.for_each_var(f);
                t.for_each_var(f);
                e.for_each_var(f);
            }
            IrKind::Concat(items) => items.iter().for_each(|e| e.for_each_var(f)),
        }
    }
}

/// Read access to variable values during evaluation.
pub trait Env {
    fn read(&self, v: Var) -> LogicVec;
}

struct NoVars;

impl Env for NoVars {
    fn read(&self, _: Var) -> LogicVec {
        unreachable!("constant expression read a variable")
    }
}

pub fn dyn_slice(v: LogicVec, start: i64, width: u32) -> LogicVec {
    let mut out = LogicVec::all_x(width);
    for i in 0..width {
        let p = start + i as i64;
        if p >= 0 && p < v.width() as i64 {
            out = out.with_bit(i, v.bit(p as u32));
        }
    }
    out
}

pub fn eval(e: &IrExpr, env: &impl Env) -> LogicVec {
    let w = e.width;
    match &e.kind {
        IrKind::Const(v) => *v,
        IrKind::Var(v) => env.read(*v),
        IrKind::Slice { base, lo } => eval(base, env).slice(*lo, w),
        IrKind::DynSlice { base, index, bias } => match eval(index, env).to_u64() {
            Some(i) => dyn_slice(eval(base, env), i as i64 + bias, w),
            None => LogicVec::all_x(w),
        },
        IrKind::Unary(op, a) => {
            let a = eval(a, env);
            match op {
                UnOp::Not => a.not(),
                UnOp::Neg => LogicVec::zero(w).sub(a),
                UnOp::LogicNot => a.logic_not(),
                UnOp::ReduceAnd => a.reduce_and(),
                UnOp::ReduceOr => a.reduce_or(),
                UnOp::ReduceXor => a.reduce_xor(),
            }
        }
        IrKind::Binary(op, a, b) => {
            if matches!(op, BinaryOp::LogicAnd | BinaryOp::LogicOr) {
                let a = eval(a, env);
                // Short-circuit on a dominating left operand.
                match (op, a.truth()) {
                    (BinaryOp::LogicAnd, BitVal::Zero) => return LogicVec::from_bool(false),
                    (BinaryOp::LogicOr, BitVal::One) => return LogicVec::from_bool(true),
                    _ => {}
                }
                let b = eval(b, env);
                return if *op == BinaryOp::LogicAnd {
                    a.logic_and(b)
                } else {
                    a.logic_or(b)
                };
            }
            let (a, b) = (eval(a, env), eval(b, env));
            binary(*op, a, b)
        }
        IrKind::Ternary(c, t, f) => match eval(c, env).truth() {
            BitVal::One => eval(t, env),
            BitVal::Zero => eval(f, env),
            BitVal::X => eval(t, env).merge(eval(f, env)),
        },
        IrKind::Concat(items) => {
            let mut acc: Option<LogicVec> = None;
            for it in items {
                let v = eval(it, env);
                acc = Some(match acc {
                    None => v,
                    Some(hi) => LogicVec::concat(hi, v),
                });
            }
            acc.unwrap_or_else(|| LogicVec::zero(1)).resize(w)
        }
        IrKind::Resize(a) => eval(a, env).resize(w),
    }
}

pub fn binary(op: BinaryOp, a: LogicVec, b: LogicVec) -> LogicVec {
    match op {
        BinaryOp::And => a.and(b),
        BinaryOp::Or => a.or(b),
        BinaryOp::Xor => a.xor(b),
        BinaryOp::Xnor => a.xnor(b),
        BinaryOp::LogicAnd => a.logic_and(b),
        BinaryOp::LogicOr => a.logic_or(b),
        BinaryOp::Eq => a.eq(b),
        BinaryOp::Ne => a.ne(b),
        BinaryOp::CaseEq => LogicVec::from_bool(a == b),
        BinaryOp::CaseNe => LogicVec::from_bool(a != b),
        BinaryOp::Lt => a.lt(b),
        BinaryOp::Le => a.le(b),
        BinaryOp::Gt => a.gt(b),
        BinaryOp::Ge => a.ge(b),
        BinaryOp::Add => a.add(b),
        BinaryOp::Sub => a.sub(b),
        BinaryOp::Mul => a.mul(b),
        BinaryOp::Shl => a.shl(b),
        BinaryOp::Shr => a.shr(b),
    }
}

/// Where an assignment writes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LvSel {
    Full,
    Const { lo: u32 },
    Dyn { index: IrExpr, bias: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LvPart {
    pub var: Var,
    pub sel: LvSel,
    pub width: u32,
}

/// Assignment target; concatenation parts are most significant first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LValue {
    pub parts: Vec<LvPart>,
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseLabel {
    pub value: IrExpr,
    /// `casez` wildcard bits.
    pub wildcard: u64,
}

impl CaseLabel {
    /// The selector must be fully known; `X` label bits never match.
    pub fn matches(&self, selector: LogicVec, env: &impl Env) -> bool {
        let v = eval(&self.value, env);
        let care = !self.wildcard;
        let w = selector.width().max(v.width());
        let m = if w >= 64 { u64::MAX } else { (1u64 << w) - 1 };
        let care = care & m;
        if v.xmask() & care != 0 {
            return false;
        }
        (v.raw_bits() ^ selector.raw_bits()) & care == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrArm {
    pub labels: Vec<CaseLabel>,
    pub body: Vec<IrStmt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum IrStmt {
    Assign {
        target: LValue,
        value: IrExpr,
        nonblocking: bool,
        pos: Pos,
    },
    If {
        cond: IrExpr,
        then: Vec<IrStmt>,
        els: Vec<IrStmt>,
    },
    Case {
        selector: IrExpr,
        arms: Vec<IrArm>,
        default: Option<Vec<IrStmt>>,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Vals(Vec<LogicVec>);

    impl Env for Vals {
        fn read(&self, v: Var) -> LogicVec {
            match v {
                Var::Sig(i) => self.0[i],
                Var::Local(_) => unreachable!(),
            }
        }
    }

    fn var(i: usize, w: u32) -> IrExpr {
        IrExpr {
            kind: IrKind::Var(Var::Sig(i)),
            width: w,
        }
    }

    #[test]
    fn unknown_ternary_condition_merges() {
        let env = Vals(vec![
            LogicVec::all_x(1),
            LogicVec::from_u64(2, 0b10),
            LogicVec::from_u64(2, 0b11),
        ]);
        let e = IrExpr {
            kind: IrKind::Ternary(Box::new(var(0, 1)), Box::new(var(1, 2)), Box::new(var(2, 2))),
            width: 2,
        };
        assert_eq!(eval(&e, &env).to_bin_string(), "1x");
    }

    #[test]
    fn logic_and_short_circuits_unknown_rhs() {
        let env = Vals(vec![LogicVec::from_bool(false), LogicVec::all_x(1)]);
        let e = IrExpr {
            kind: IrKind::Binary(BinaryOp::LogicAnd, Box::new(var(0, 1)), Box::new(var(1, 1))),
            width: 1,
        };
        assert_eq!(eval(&e, &env), LogicVec::from_bool(false));
    }

    #[test]
    fn dyn_slice_out_of_range_reads_x() {
        let v = LogicVec::from_u64(4, 0b1011);
        assert_eq!(dyn_slice(v, 3, 2).to_bin_string(), "x1");
        assert_eq!(dyn_slice(v, -1, 2).to_bin_string(), "1x");
    }

    #[test]
    fn casez_label_wildcards() {
        let env = Vals(vec![]);
        let label = CaseLabel {
            value: IrExpr::constant(LogicVec::from_u64(3, 0b100)),
            wildcard: 0b011,
        };
        assert!(label.matches(LogicVec::from_u64(3, 0b110), &env));
        assert!(!label.matches(LogicVec::from_u64(3, 0b010), &env));
    }
}
