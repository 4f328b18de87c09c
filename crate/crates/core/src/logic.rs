//! Three-valued logic vectors.
//!
//! A [`LogicVec`] packs up to 64 bits as a value word and an unknown mask.
//! Every bit is `0`, `1` or `X`; bits with the mask set carry no value.
//! Operators are pessimistic about `X` except where one operand dominates
//! (`0 & X = 0`, `1 | X = 1`, `0 && X = 0`, `1 || X = 1`).

use std::fmt;

use serde::{Deserialize, Serialize};

/// Widest vector the simulator represents.
pub const MAX_WIDTH: u32 = 64;

/// A single logic bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BitVal {
    Zero,
    One,
    X,
}

impl BitVal {
    pub fn from_bool(b: bool) -> Self {
        if b {
            BitVal::One
        } else {
            BitVal::Zero
        }
    }

    pub fn to_char(self) -> char {
        match self {
            BitVal::Zero => '0',
            BitVal::One => '1',
            BitVal::X => 'x',
        }
    }
}

#[inline]
fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LogicVec {
    width: u32,
    bits: u64,
    xmask: u64,
}

#[allow(clippy::should_implement_trait)]
impl LogicVec {
    pub fn new(width: u32, bits: u64, xmask: u64) -> Self {
        let width = width.clamp(1, MAX_WIDTH);
        let m = mask(width);
        let xmask = xmask & m;
        LogicVec {
            width,
            bits: bits & m & !xmask,
            xmask,
        }
    }

    pub fn from_u64(width: u32, value: u64) -> Self {
        Self::new(width, value, 0)
    }

    pub fn all_x(width: u32) -> Self {
        Self::new(width, 0, u64::MAX)
    }

    pub fn zero(width: u32) -> Self {
        Self::new(width, 0, 0)
    }

    pub fn from_bool(b: bool) -> Self {
        Self::from_u64(1, b as u64)
    }

    pub fn from_bit(b: BitVal) -> Self {
        match b {
            BitVal::Zero => Self::zero(1),
            BitVal::One => Self::from_u64(1, 1),
            BitVal::X => Self::all_x(1),
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn raw_bits(&self) -> u64 {
        self.bits
    }

    pub fn xmask(&self) -> u64 {
        self.xmask
    }

    pub fn is_known(&self) -> bool {
        self.xmask == 0
    }

    pub fn has_x(&self) -> bool {
        self.xmask != 0
    }

    pub fn is_all_x(&self) -> bool {
        self.xmask == mask(self.width)
    }

    /// The value as an integer when every bit is known.
    pub fn to_u64(&self) -> Option<u64> {
        self.is_known().then_some(self.bits)
    }

    pub fn bit(&self, i: u32) -> BitVal {
        if i >= self.width {
            return BitVal::X;
        }
        if self.xmask >> i & 1 == 1 {
            BitVal::X
        } else if self.bits >> i & 1 == 1 {
            BitVal::One
        } else {
            BitVal::Zero
        }
    }

    pub fn with_bit(self, i: u32, b: BitVal) -> Self {
        if i >= self.width {
            return self;
        }
        let (v, x) = match b {
            BitVal::Zero => (0, 0),
            BitVal::One => (1, 0),
            BitVal::X => (0, 1),
        };
        let clear = !(1u64 << i);
        Self::new(
            self.width,
            (self.bits & clear) | (v << i),
            (self.xmask & clear) | (x << i),
        )
    }

    /// Zero-extends or truncates to `width`.
    pub fn resize(self, width: u32) -> Self {
        Self::new(width, self.bits, self.xmask)
    }

    /// Truthiness for conditions: `One` if any known bit is set, `Zero` if all
    /// bits are known zero, `X` otherwise.
    pub fn truth(&self) -> BitVal {
        if self.bits != 0 {
            BitVal::One
        } else if self.xmask == 0 {
            BitVal::Zero
        } else {
            BitVal::X
        }
    }

    pub fn not(self) -> Self {
        Self::new(self.width, !self.bits, self.xmask)
    }

    pub fn and(self, rhs: Self) -> Self {
        let w = self.width.max(rhs.width);
        let (a, b) = (self.resize(w), rhs.resize(w));
        let m = mask(w);
        let a0 = !a.bits & !a.xmask & m;
        let b0 = !b.bits & !b.xmask & m;
        let zero = a0 | b0;
        let one = a.bits & b.bits;
        Self::new(w, one, m & !zero & !one)
    }

    pub fn or(self, rhs: Self) -> Self {
        let w = self.width.max(rhs.width);
        let (a, b) = (self.resize(w), rhs.resize(w));
        let m = mask(w);
        let one = a.bits | b.bits;
        let zero = !a.bits & !a.xmask & !b.bits & !b.xmask & m;
        Self::new(w, one, m & !zero & !one)
    }

    pub fn xor(self, rhs: Self) -> Self {
        let w = self.width.max(rhs.width);
        let (a, b) = (self.resize(w), rhs.resize(w));
        Self::new(w, a.bits ^ b.bits, a.xmask | b.xmask)
    }

    pub fn xnor(self, rhs: Self) -> Self {
        self.xor(rhs).not()
    }

    pub fn reduce_and(self) -> Self {
        let m = mask(self.width);
        if (!self.bits & !self.xmask & m) != 0 {
            Self::from_bool(false)
        } else if self.xmask != 0 {
            Self::all_x(1)
        } else {
            Self::from_bool(true)
        }
    }

    pub fn reduce_or(self) -> Self {
        Self::from_bit(self.truth())
    }

    pub fn reduce_xor(self) -> Self {
        if self.xmask != 0 {
            Self::all_x(1)
        } else {
            Self::from_bool(self.bits.count_ones() % 2 == 1)
        }
    }

    pub fn logic_not(self) -> Self {
        match self.truth() {
            BitVal::Zero => Self::from_bool(true),
            BitVal::One => Self::from_bool(false),
            BitVal::X => Self::all_x(1),
        }
    }

    pub fn logic_and(self, rhs: Self) -> Self {
        match (self.truth(), rhs.truth()) {
            (BitVal::Zero, _) | (_, BitVal::Zero) => Self::from_bool(false),
            (BitVal::One, BitVal::One) => Self::from_bool(true),
            _ => Self::all_x(1),
        }
    }

    pub fn logic_or(self, rhs: Self) -> Self {
        match (self.truth(), rhs.truth()) {
            (BitVal::One, _) | (_, BitVal::One) => Self::from_bool(true),
            (BitVal::Zero, BitVal::Zero) => Self::from_bool(false),
            _ => Self::all_x(1),
        }
    }

    /// Logical equality. Known bits that differ decide the result even when
    /// other bits are unknown.
    pub fn eq(self, rhs: Self) -> Self {
        let w = self.width.max(rhs.width);
        let (a, b) = (self.resize(w), rhs.resize(w));
        let known = !(a.xmask | b.xmask) & mask(w);
        if (a.bits ^ b.bits) & known != 0 {
            Self::from_bool(false)
        } else if known != mask(w) {
            Self::all_x(1)
        } else {
            Self::from_bool(true)
        }
    }

    pub fn ne(self, rhs: Self) -> Self {
        self.eq(rhs).logic_not()
    }

    fn compare(self, rhs: Self, f: impl Fn(u64, u64) -> bool) -> Self {
        match (self.to_u64(), rhs.to_u64()) {
            (Some(a), Some(b)) => Self::from_bool(f(a, b)),
            _ => Self::all_x(1),
        }
    }

    pub fn lt(self, rhs: Self) -> Self {
        self.compare(rhs, |a, b| a < b)
    }

    pub fn le(self, rhs: Self) -> Self {
        self.compare(rhs, |a, b| a <= b)
    }

    pub fn gt(self, rhs: Self) -> Self {
        self.compare(rhs, |a, b| a > b)
    }

    pub fn ge(self, rhs: Self) -> Self {
        self.compare(rhs, |a, b| a >= b)
    }

    fn arith(self, rhs: Self, f: impl Fn(u64, u64) -> u64) -> Self {
        let w = self.width.max(rhs.width);
        match (self.to_u64(), rhs.to_u64()) {
            (Some(a), Some(b)) => Self::from_u64(w, f(a, b)),
            _ => Self::all_x(w),
        }
    }

    pub fn add(self, rhs: Self) -> Self {
        self.arith(rhs, u64::wrapping_add)
    }

    pub fn sub(self, rhs: Self) -> Self {
        self.arith(rhs, u64::wrapping_sub)
    }

    pub fn mul(self, rhs: Self) -> Self {
        self.arith(rhs, u64::wrapping_mul)
    }

    pub fn shl(self, amount: Self) -> Self {
        match amount.to_u64() {
            Some(n) if n >= self.width as u64 => Self::zero(self.width),
            Some(n) => Self::new(self.width, self.bits << n, self.xmask << n),
            None => Self::all_x(self.width),
        }
    }

    pub fn shr(self, amount: Self) -> Self {
        match amount.to_u64() {
            Some(n) if n >= self.width as u64 => Self::zero(self.width),
            Some(n) => Self::new(self.width, self.bits >> n, self.xmask >> n),
            None => Self::all_x(self.width),
        }
    }

    /// Bitwise merge used for an unknown ternary condition: bits that agree
    /// and are known survive, everything else becomes `X`.
    pub fn merge(self, other: Self) -> Self {
        let w = self.width.max(other.width);
        let (a, b) = (self.resize(w), other.resize(w));
        let differ = (a.bits ^ b.bits) | a.xmask | b.xmask;
        Self::new(w, a.bits, differ)
    }

    /// `{hi, lo}`; widths beyond 64 bits are truncated from the top.
    pub fn concat(hi: Self, lo: Self) -> Self {
        let w = (hi.width + lo.width).min(MAX_WIDTH);
        let shift = lo.width;
        let (hb, hx) = if shift >= 64 {
            (0, 0)
        } else {
            (hi.bits << shift, hi.xmask << shift)
        };
        Self::new(w, hb | lo.bits, hx | lo.xmask)
    }

    /// Bits `[lo + width - 1 : lo]`; bits outside the vector read as `X`.
    pub fn slice(self, lo: u32, width: u32) -> Self {
        let mut out = Self::all_x(width);
        for i in 0..width {
            out = out.with_bit(i, self.bit(lo + i));
        }
        out
    }

    /// Writes `value` into bits starting at `lo`, ignoring bits past the top.
    pub fn splice(self, lo: u32, value: Self) -> Self {
        let mut out = self;
        for i in 0..value.width {
            out = out.with_bit(lo + i, value.bit(i));
        }
        out
    }

    /// True when `self` refines `other`: wherever `other` is known, `self`
    /// holds the same value.
    pub fn refines(&self, other: &Self) -> bool {
        let w = self.width.max(other.width);
        let (a, b) = (self.resize(w), other.resize(w));
        let known = !b.xmask & mask(w);
        a.xmask & known == 0 && (a.bits ^ b.bits) & known == 0
    }

    /// Compares against an expected value in which `X` bits are don't-cares.
    pub fn matches_expected(&self, expected: &Self) -> bool {
        self.refines(expected)
    }

    /// Binary string, most significant bit first.
    pub fn to_bin_string(&self) -> String {
        (0..self.width).rev().map(|i| self.bit(i).to_char()).collect()
    }

    pub fn parse_bin(s: &str) -> Option<Self> {
        let digits: Vec<char> = s.chars().filter(|c| *c != '_').collect();
        if digits.is_empty() || digits.len() > MAX_WIDTH as usize {
            return None;
        }
        let mut v = Self::zero(digits.len() as u32);
        for (i, c) in digits.iter().rev().enumerate() {
            let b = match c {
                '0' => BitVal::Zero,
                '1' => BitVal::One,
                'x' | 'X' => BitVal::X,
                _ => return None,
            };
            v = v.with_bit(i as u32, b);
        }
        Some(v)
    }
}

impl fmt::Display for LogicVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_u64() {
            Some(v) if self.width == 1 => write!(f, "{v}"),
            Some(v) => write!(f, "{}'d{}", self.width, v),
            None => write!(f, "{}'b{}", self.width, self.to_bin_string()),
        }
    }
}

impl serde::Serialize for LogicVec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_bin_string())
    }
}

impl<'de> serde::Deserialize<'de> for LogicVec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        LogicVec::parse_bin(&s).ok_or_else(|| serde::de::Error::custom(format!("invalid logic vector '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x1() -> LogicVec {
        LogicVec::all_x(1)
    }

    fn b(v: bool) -> LogicVec {
        LogicVec::from_bool(v)
    }

    #[test]
    fn dominance_rules() {
        assert_eq!(b(false).and(x1()), b(false));
        assert_eq!(b(true).or(x1()), b(true));
        assert_eq!(b(true).and(x1()), x1());
        assert_eq!(b(false).or(x1()), x1());
        assert_eq!(b(false).logic_and(x1()), b(false));
        assert_eq!(b(true).logic_or(x1()), b(true));
        assert_eq!(x1().xor(b(false)), x1());
    }

    #[test]
    fn equality_with_unknowns() {
        let a = LogicVec::parse_bin("1x").unwrap();
        assert_eq!(a.eq(LogicVec::from_u64(2, 0)), b(false));
        assert_eq!(a.eq(LogicVec::from_u64(2, 2)), x1());
        assert_eq!(LogicVec::from_u64(2, 3).eq(LogicVec::from_u64(4, 3)), b(true));
    }

    #[test]
    fn arithmetic_is_x_pessimistic() {
        let a = LogicVec::parse_bin("0x1").unwrap();
        assert!(a.add(LogicVec::from_u64(3, 1)).xmask() == 0b111);
        assert_eq!(
            LogicVec::from_u64(4, 15).add(LogicVec::from_u64(4, 1)),
            LogicVec::zero(4)
        );
    }

    #[test]
    fn slicing_and_concat() {
        let v = LogicVec::from_u64(8, 0b1010_0110);
        assert_eq!(v.slice(1, 3), LogicVec::from_u64(3, 0b011));
        assert_eq!(v.slice(7, 2).bit(1), BitVal::X);
        let c = LogicVec::concat(LogicVec::from_u64(2, 0b10), LogicVec::from_u64(3, 0b001));
        assert_eq!(c, LogicVec::from_u64(5, 0b10001));
        let s = LogicVec::zero(4).splice(1, LogicVec::from_u64(2, 0b11));
        assert_eq!(s, LogicVec::from_u64(4, 0b0110));
    }

    #[test]
    fn refinement() {
        let expected = LogicVec::parse_bin("1x0").unwrap();
        assert!(LogicVec::from_u64(3, 0b110).matches_expected(&expected));
        assert!(LogicVec::from_u64(3, 0b100).matches_expected(&expected));
        assert!(!LogicVec::from_u64(3, 0b101).matches_expected(&expected));
        assert!(!LogicVec::parse_bin("x00").unwrap().matches_expected(&expected));
    }
}
