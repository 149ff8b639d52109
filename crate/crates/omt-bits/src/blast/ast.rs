//! Sorted terms for the accepted quantifier-free BV/FP fragment, plus a
//! straightforward semantic evaluator over concrete assignments.
//!
//! The evaluator is the independent reference the CNF circuits are
//! tested against: it computes with big integers and the exact FP
//! semantics, never through the SAT solver.

use crate::bitvec::{BvConst, BvSort};
use crate::fp::{self, FpBits, FpSort};
use num::BigUint;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    Bool,
    BitVec(BvSort),
    Fp(FpSort),
}

impl Sort {
    pub fn bit_width(&self) -> Option<usize> {
        match self {
            Sort::Bool => None,
            Sort::BitVec(s) => Some(s.width()),
            Sort::Fp(s) => Some(s.total_bits()),
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::BitVec(s) => write!(f, "{s}"),
            Sort::Fp(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SortError {
    #[error("operand of `{op}` has sort {got}, expected {expected}")]
    Expected {
        op: &'static str,
        expected: String,
        got: String,
    },
    #[error("operands of `{op}` have mismatched sorts {0} and {1}", .lhs, .rhs)]
    Mismatch {
        op: &'static str,
        lhs: String,
        rhs: String,
    },
    #[error("extract [{hi}:{lo}] out of range for width {width}")]
    ExtractRange { hi: u32, lo: u32, width: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TermKind {
    True,
    False,
    BoolVar(String),
    Not(Term),
    And(Vec<Term>),
    Or(Vec<Term>),
    Xor(Term, Term),
    Implies(Term, Term),
    /// Bool iff, BV bitwise equality, FP bit-pattern identity.
    Eq(Term, Term),
    Ite(Term, Term, Term),

    BvLit(BvConst),
    BvVar(String, BvSort),
    BvNot(Term),
    BvAnd(Term, Term),
    BvOr(Term, Term),
    BvXor(Term, Term),
    BvNxor(Term, Term),
    BvAdd(Term, Term),
    BvMul(Term, Term),
    BvShl(Term, Term),
    BvLshr(Term, Term),
    Concat(Term, Term),
    /// SMT-LIB extract: `hi`/`lo` count from the LSB, inclusive.
    Extract { hi: u32, lo: u32, arg: Term },
    BvUlt(Term, Term),
    BvUle(Term, Term),
    BvUgt(Term, Term),
    BvUge(Term, Term),
    BvSlt(Term, Term),
    BvSle(Term, Term),
    BvSgt(Term, Term),
    BvSge(Term, Term),

    FpLit(FpBits),
    FpVar(String, FpSort),
    FpEq(Term, Term),
    FpLt(Term, Term),
    FpLeq(Term, Term),
    FpGt(Term, Term),
    FpGeq(Term, Term),
    FpIsNan(Term),
    FpIsInf(Term),
    FpIsZero(Term),
    FpIsNormal(Term),
    FpIsSubnormal(Term),
    FpIsNegative(Term),
    FpIsPositive(Term),
    FpNeg(Term),
    FpAbs(Term),
    FpMin(Term, Term),
    FpMax(Term, Term),
}

/// A shared, immutable, well-sorted term. Equality and hashing are
/// structural, which lets the encoder cache shared subcircuits.
#[derive(Debug, Clone)]
pub struct Term {
    kind: Arc<TermKind>,
    sort: Sort,
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.kind, &other.kind) || self.kind == other.kind
    }
}

impl Eq for Term {}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
    }
}

fn expect(op: &'static str, t: &Term, want: &str) -> SortError {
    SortError::Expected {
        op,
        expected: want.to_string(),
        got: t.sort().to_string(),
    }
}

fn same(op: &'static str, a: &Term, b: &Term) -> SortError {
    SortError::Mismatch {
        op,
        lhs: a.sort().to_string(),
        rhs: b.sort().to_string(),
    }
}

impl Term {
    pub fn sort(&self) -> Sort {
        self.sort
    }

    pub fn kind(&self) -> &TermKind {
        &self.kind
    }

    fn mk(kind: TermKind, sort: Sort) -> Term {
        Term {
            kind: Arc::new(kind),
            sort,
        }
    }

    /// Validates operand sorts and computes the result sort.
    pub fn new(kind: TermKind) -> Result<Term, SortError> {
        use TermKind::*;
        let bool_sort = |op: &'static str, t: &Term| -> Result<(), SortError> {
            if t.sort() == Sort::Bool {
                Ok(())
            } else {
                Err(expect(op, t, "Bool"))
            }
        };
        let bv_sort = |op: &'static str, t: &Term| -> Result<BvSort, SortError> {
            match t.sort() {
                Sort::BitVec(s) => Ok(s),
                _ => Err(expect(op, t, "(_ BitVec ..)")),
            }
        };
        let fp_sort = |op: &'static str, t: &Term| -> Result<FpSort, SortError> {
            match t.sort() {
                Sort::Fp(s) => Ok(s),
                _ => Err(expect(op, t, "(_ FloatingPoint ..)")),
            }
        };
        let sort = match &kind {
            True | False | BoolVar(_) => Sort::Bool,
            Not(t) => {
                bool_sort("not", t)?;
                Sort::Bool
            }
            And(ts) | Or(ts) => {
                let op = if matches!(kind, And(_)) { "and" } else { "or" };
                for t in ts {
                    bool_sort(op, t)?;
                }
                Sort::Bool
            }
            Xor(a, b) => {
                bool_sort("xor", a)?;
                bool_sort("xor", b)?;
                Sort::Bool
            }
            Implies(a, b) => {
                bool_sort("=>", a)?;
                bool_sort("=>", b)?;
                Sort::Bool
            }
            Eq(a, b) => {
                if a.sort() != b.sort() {
                    return Err(same("=", a, b));
                }
                Sort::Bool
            }
            Ite(c, t, e) => {
                bool_sort("ite", c)?;
                if t.sort() != e.sort() {
                    return Err(same("ite", t, e));
                }
                t.sort()
            }
            BvLit(c) => Sort::BitVec(c.sort()),
            BvVar(_, s) => Sort::BitVec(*s),
            BvNot(t) => Sort::BitVec(bv_sort("bvnot", t)?),
            BvAnd(a, b) | BvOr(a, b) | BvXor(a, b) | BvNxor(a, b) | BvAdd(a, b)
            | BvMul(a, b) | BvShl(a, b) | BvLshr(a, b) => {
                let op = kind.op_name();
                let sa = bv_sort(op, a)?;
                let sb = bv_sort(op, b)?;
                if sa != sb {
                    return Err(same(op, a, b));
                }
                Sort::BitVec(sa)
            }
            Concat(a, b) => {
                let sa = bv_sort("concat", a)?;
                let sb = bv_sort("concat", b)?;
                Sort::BitVec(BvSort::new(sa.width() + sb.width()).unwrap())
            }
            Extract { hi, lo, arg } => {
                let s = bv_sort("extract", arg)?;
                if hi < lo || *hi as usize >= s.width() {
                    return Err(SortError::ExtractRange {
                        hi: *hi,
                        lo: *lo,
                        width: s.width(),
                    });
                }
                Sort::BitVec(BvSort::new((hi - lo + 1) as usize).unwrap())
            }
            BvUlt(a, b) | BvUle(a, b) | BvUgt(a, b) | BvUge(a, b) | BvSlt(a, b)
            | BvSle(a, b) | BvSgt(a, b) | BvSge(a, b) => {
                let op = kind.op_name();
                let sa = bv_sort(op, a)?;
                let sb = bv_sort(op, b)?;
                if sa != sb {
                    return Err(same(op, a, b));
                }
                Sort::Bool
            }
            FpLit(c) => Sort::Fp(c.sort()),
            FpVar(_, s) => Sort::Fp(*s),
            FpEq(a, b) | FpLt(a, b) | FpLeq(a, b) | FpGt(a, b) | FpGeq(a, b) => {
                let op = kind.op_name();
                let sa = fp_sort(op, a)?;
                let sb = fp_sort(op, b)?;
                if sa != sb {
                    return Err(same(op, a, b));
                }
                Sort::Bool
            }
            FpIsNan(t) | FpIsInf(t) | FpIsZero(t) | FpIsNormal(t) | FpIsSubnormal(t)
            | FpIsNegative(t) | FpIsPositive(t) => {
                fp_sort(kind.op_name(), t)?;
                Sort::Bool
            }
            FpNeg(t) | FpAbs(t) => Sort::Fp(fp_sort(kind.op_name(), t)?),
            FpMin(a, b) | FpMax(a, b) => {
                let op = kind.op_name();
                let sa = fp_sort(op, a)?;
                let sb = fp_sort(op, b)?;
                if sa != sb {
                    return Err(same(op, a, b));
                }
                Sort::Fp(sa)
            }
        };
        Ok(Term::mk(kind, sort))
    }

    pub fn truth(value: bool) -> Term {
        Term::mk(
            if value { TermKind::True } else { TermKind::False },
            Sort::Bool,
        )
    }

    pub fn bool_var(name: impl Into<String>) -> Term {
        Term::mk(TermKind::BoolVar(name.into()), Sort::Bool)
    }

    pub fn bv_var(name: impl Into<String>, sort: BvSort) -> Term {
        Term::mk(TermKind::BvVar(name.into(), sort), Sort::BitVec(sort))
    }

    pub fn fp_var(name: impl Into<String>, sort: FpSort) -> Term {
        Term::mk(TermKind::FpVar(name.into(), sort), Sort::Fp(sort))
    }

    pub fn bv_lit(c: BvConst) -> Term {
        let s = c.sort();
        Term::mk(TermKind::BvLit(c), Sort::BitVec(s))
    }

    pub fn fp_lit(c: FpBits) -> Term {
        let s = c.sort();
        Term::mk(TermKind::FpLit(c), Sort::Fp(s))
    }

    pub fn negate(t: Term) -> Term {
        Term::new(TermKind::Not(t)).expect("bool operand")
    }

    pub fn and(ts: Vec<Term>) -> Term {
        Term::new(TermKind::And(ts)).expect("bool operands")
    }

    pub fn or(ts: Vec<Term>) -> Term {
        Term::new(TermKind::Or(ts)).expect("bool operands")
    }

    pub fn eq(a: Term, b: Term) -> Result<Term, SortError> {
        Term::new(TermKind::Eq(a, b))
    }

    /// Variable name if this is a variable leaf.
    pub fn var_name(&self) -> Option<&str> {
        match self.kind() {
            TermKind::BoolVar(n) | TermKind::BvVar(n, _) | TermKind::FpVar(n, _) => Some(n),
            _ => None,
        }
    }
}

impl TermKind {
    pub fn op_name(&self) -> &'static str {
        use TermKind::*;
        match self {
            True => "true",
            False => "false",
            BoolVar(_) | BvVar(..) | FpVar(..) => "var",
            Not(_) => "not",
            And(_) => "and",
            Or(_) => "or",
            Xor(..) => "xor",
            Implies(..) => "=>",
            Eq(..) => "=",
            Ite(..) => "ite",
            BvLit(_) | FpLit(_) => "lit",
            BvNot(_) => "bvnot",
            BvAnd(..) => "bvand",
            BvOr(..) => "bvor",
            BvXor(..) => "bvxor",
            BvNxor(..) => "bvxnor",
            BvAdd(..) => "bvadd",
            BvMul(..) => "bvmul",
            BvShl(..) => "bvshl",
            BvLshr(..) => "bvlshr",
            Concat(..) => "concat",
            Extract { .. } => "extract",
            BvUlt(..) => "bvult",
            BvUle(..) => "bvule",
            BvUgt(..) => "bvugt",
            BvUge(..) => "bvuge",
            BvSlt(..) => "bvslt",
            BvSle(..) => "bvsle",
            BvSgt(..) => "bvsgt",
            BvSge(..) => "bvsge",
            FpEq(..) => "fp.eq",
            FpLt(..) => "fp.lt",
            FpLeq(..) => "fp.leq",
            FpGt(..) => "fp.gt",
            FpGeq(..) => "fp.geq",
            FpIsNan(_) => "fp.isNaN",
            FpIsInf(_) => "fp.isInfinite",
            FpIsZero(_) => "fp.isZero",
            FpIsNormal(_) => "fp.isNormal",
            FpIsSubnormal(_) => "fp.isSubnormal",
            FpIsNegative(_) => "fp.isNegative",
            FpIsPositive(_) => "fp.isPositive",
            FpNeg(_) => "fp.neg",
            FpAbs(_) => "fp.abs",
            FpMin(..) => "fp.min",
            FpMax(..) => "fp.max",
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TermKind::*;
        match self.kind() {
            True => write!(f, "true"),
            False => write!(f, "false"),
            BoolVar(n) | BvVar(n, _) | FpVar(n, _) => write!(f, "{n}"),
            BvLit(c) => write!(f, "{c}"),
            FpLit(c) => write!(f, "{c}"),
            Not(t) => write!(f, "(not {t})"),
            And(ts) | Or(ts) => {
                write!(f, "({}", self.kind().op_name())?;
                for t in ts {
                    write!(f, " {t}")?;
                }
                write!(f, ")")
            }
            Xor(a, b) | Implies(a, b) | Eq(a, b) | BvAnd(a, b) | BvOr(a, b) | BvXor(a, b)
            | BvNxor(a, b) | BvAdd(a, b) | BvMul(a, b) | BvShl(a, b) | BvLshr(a, b)
            | Concat(a, b) | BvUlt(a, b) | BvUle(a, b) | BvUgt(a, b) | BvUge(a, b)
            | BvSlt(a, b) | BvSle(a, b) | BvSgt(a, b) | BvSge(a, b) | FpEq(a, b)
            | FpLt(a, b) | FpLeq(a, b) | FpGt(a, b) | FpGeq(a, b) | FpMin(a, b)
            | FpMax(a, b) => {
                write!(f, "({} {a} {b})", self.kind().op_name())
            }
            Ite(c, t, e) => write!(f, "(ite {c} {t} {e})"),
            BvNot(t) | FpIsNan(t) | FpIsInf(t) | FpIsZero(t) | FpIsNormal(t)
            | FpIsSubnormal(t) | FpIsNegative(t) | FpIsPositive(t) | FpNeg(t) | FpAbs(t) => {
                write!(f, "({} {t})", self.kind().op_name())
            }
            Extract { hi, lo, arg } => write!(f, "((_ extract {hi} {lo}) {arg})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable `{0}` has no value in the assignment")]
    Unbound(String),
}

/// Concrete values for declared variables; word-sorted variables (BV and
/// FP alike) are bound to raw MSB-first patterns.
#[derive(Debug, Clone, Default)]
pub struct Assignment {
    pub bools: HashMap<String, bool>,
    pub words: HashMap<String, Vec<bool>>,
}

impl Assignment {
    pub fn bind_bool(&mut self, name: impl Into<String>, v: bool) {
        self.bools.insert(name.into(), v);
    }

    pub fn bind_word(&mut self, name: impl Into<String>, bits: Vec<bool>) {
        self.words.insert(name.into(), bits);
    }
}

fn word_value(bits: &[bool]) -> BigUint {
    let mut v = BigUint::ZERO;
    for &b in bits {
        v <<= 1u8;
        if b {
            v |= BigUint::from(1u8);
        }
    }
    v
}

fn word_from_value(width: usize, v: &BigUint) -> Vec<bool> {
    (0..width).map(|i| v.bit((width - 1 - i) as u64)).collect()
}

fn fp_of(bits: Vec<bool>, sort: FpSort) -> FpBits {
    FpBits::from_bits(sort, bits).expect("evaluator produced a well-sized pattern")
}

pub fn eval_bool(t: &Term, a: &Assignment) -> Result<bool, EvalError> {
    use TermKind::*;
    Ok(match t.kind() {
        True => true,
        False => false,
        BoolVar(n) => *a
            .bools
            .get(n)
            .ok_or_else(|| EvalError::Unbound(n.clone()))?,
        Not(x) => !eval_bool(x, a)?,
        And(ts) => {
            for x in ts {
                if !eval_bool(x, a)? {
                    return Ok(false);
                }
            }
            true
        }
        Or(ts) => {
            for x in ts {
                if eval_bool(x, a)? {
                    return Ok(true);
                }
            }
            false
        }
        Xor(x, y) => eval_bool(x, a)? != eval_bool(y, a)?,
        Implies(x, y) => !eval_bool(x, a)? || eval_bool(y, a)?,
        Eq(x, y) => match x.sort() {
            Sort::Bool => eval_bool(x, a)? == eval_bool(y, a)?,
            _ => eval_word(x, a)? == eval_word(y, a)?,
        },
        Ite(c, x, y) => {
            if eval_bool(c, a)? {
                eval_bool(x, a)?
            } else {
                eval_bool(y, a)?
            }
        }
        BvUlt(x, y) => word_value(&eval_word(x, a)?) < word_value(&eval_word(y, a)?),
        BvUle(x, y) => word_value(&eval_word(x, a)?) <= word_value(&eval_word(y, a)?),
        BvUgt(x, y) => word_value(&eval_word(x, a)?) > word_value(&eval_word(y, a)?),
        BvUge(x, y) => word_value(&eval_word(x, a)?) >= word_value(&eval_word(y, a)?),
        BvSlt(x, y) | BvSle(x, y) | BvSgt(x, y) | BvSge(x, y) => {
            use crate::bitvec::Signedness::Signed;
            let xv = BvConst::from_bits(eval_word(x, a)?).unwrap().value(Signed);
            let yv = BvConst::from_bits(eval_word(y, a)?).unwrap().value(Signed);
            match t.kind() {
                BvSlt(..) => xv < yv,
                BvSle(..) => xv <= yv,
                BvSgt(..) => xv > yv,
                _ => xv >= yv,
            }
        }
        FpEq(x, y) | FpLt(x, y) | FpLeq(x, y) | FpGt(x, y) | FpGeq(x, y) => {
            let s = match x.sort() {
                Sort::Fp(s) => s,
                _ => unreachable!("well-sorted term"),
            };
            let xv = fp_of(eval_word(x, a)?, s);
            let yv = fp_of(eval_word(y, a)?, s);
            match t.kind() {
                FpEq(..) => fp::fp_eq(&xv, &yv).unwrap(),
                FpLt(..) => fp::fp_lt(&xv, &yv).unwrap(),
                FpLeq(..) => fp::fp_leq(&xv, &yv).unwrap(),
                FpGt(..) => fp::fp_gt(&xv, &yv).unwrap(),
                _ => fp::fp_geq(&xv, &yv).unwrap(),
            }
        }
        FpIsNan(x) | FpIsInf(x) | FpIsZero(x) | FpIsNormal(x) | FpIsSubnormal(x)
        | FpIsNegative(x) | FpIsPositive(x) => {
            use crate::fp::FpClass::*;
            let s = match x.sort() {
                Sort::Fp(s) => s,
                _ => unreachable!("well-sorted term"),
            };
            let v = fp_of(eval_word(x, a)?, s);
            let class = v.classify();
            match t.kind() {
                FpIsNan(_) => class == Nan,
                FpIsInf(_) => matches!(class, PosInf | NegInf),
                FpIsZero(_) => matches!(class, PosZero | NegZero),
                FpIsNormal(_) => class == Normal,
                FpIsSubnormal(_) => class == Subnormal,
                FpIsNegative(_) => matches!(class, NegInf | NegZero) || (class == Normal || class == Subnormal) && v.sign_bit(),
                _ => matches!(class, PosInf | PosZero) || (class == Normal || class == Subnormal) && !v.sign_bit(),
            }
        }
        _ => unreachable!("eval_bool on a word-sorted term"),
    })
}

pub fn eval_word(t: &Term, a: &Assignment) -> Result<Vec<bool>, EvalError> {
    use TermKind::*;
    let width = t.sort().bit_width().expect("word-sorted term");
    Ok(match t.kind() {
        BvLit(c) => c.bits().to_vec(),
        FpLit(c) => c.bits().to_vec(),
        BvVar(n, _) | FpVar(n, _) => a
            .words
            .get(n)
            .ok_or_else(|| EvalError::Unbound(n.clone()))?
            .clone(),
        BvNot(x) => eval_word(x, a)?.iter().map(|&b| !b).collect(),
        BvAnd(x, y) | BvOr(x, y) | BvXor(x, y) | BvNxor(x, y) => {
            let xs = eval_word(x, a)?;
            let ys = eval_word(y, a)?;
            xs.iter()
                .zip(&ys)
                .map(|(&p, &q)| match t.kind() {
                    BvAnd(..) => p && q,
                    BvOr(..) => p || q,
                    BvXor(..) => p != q,
                    _ => p == q,
                })
                .collect()
        }
        BvAdd(x, y) => {
            let v = word_value(&eval_word(x, a)?) + word_value(&eval_word(y, a)?);
            word_from_value(width, &v)
        }
        BvMul(x, y) => {
            let v = word_value(&eval_word(x, a)?) * word_value(&eval_word(y, a)?);
            word_from_value(width, &v)
        }
        BvShl(x, y) => {
            let xs = eval_word(x, a)?;
            let sh = word_value(&eval_word(y, a)?);
            shift(&xs, &sh, true)
        }
        BvLshr(x, y) => {
            let xs = eval_word(x, a)?;
            let sh = word_value(&eval_word(y, a)?);
            shift(&xs, &sh, false)
        }
        Concat(x, y) => {
            let mut xs = eval_word(x, a)?;
            xs.extend(eval_word(y, a)?);
            xs
        }
        Extract { hi, lo, arg } => {
            let xs = eval_word(arg, a)?;
            let n = xs.len();
            // MSB-first storage, LSB-based indices
            xs[n - 1 - *hi as usize..=n - 1 - *lo as usize].to_vec()
        }
        Ite(c, x, y) => {
            if eval_bool(c, a)? {
                eval_word(x, a)?
            } else {
                eval_word(y, a)?
            }
        }
        FpNeg(x) => {
            let mut xs = eval_word(x, a)?;
            xs[0] = !xs[0];
            xs
        }
        FpAbs(x) => {
            let mut xs = eval_word(x, a)?;
            xs[0] = false;
            xs
        }
        FpMin(x, y) | FpMax(x, y) => {
            let s = match x.sort() {
                Sort::Fp(s) => s,
                _ => unreachable!("well-sorted term"),
            };
            let xv = fp_of(eval_word(x, a)?, s);
            let yv = fp_of(eval_word(y, a)?, s);
            let min = matches!(t.kind(), FpMin(..));
            fp_min_max(&xv, &yv, min).bits().to_vec()
        }
        _ => unreachable!("eval_word on a bool-sorted term"),
    })
}

fn shift(bits: &[bool], amount: &BigUint, left: bool) -> Vec<bool> {
    let w = bits.len();
    if *amount >= BigUint::from(w) {
        return vec![false; w];
    }
    let k = amount.to_u32_digits().first().copied().unwrap_or(0) as usize;
    let mut out = vec![false; w];
    if left {
        out[..w - k].copy_from_slice(&bits[k..]);
    } else {
        out[k..].copy_from_slice(&bits[..w - k]);
    }
    out
}

/// Deterministic min/max: NaN loses to any number, and when both
/// operands are zeros of opposite sign, min picks -0 and max picks +0.
pub fn fp_min_max(a: &FpBits, b: &FpBits, min: bool) -> FpBits {
    if a.is_nan() {
        return b.clone();
    }
    if b.is_nan() {
        return a.clone();
    }
    let a_wins = if min {
        fp::fp_lt(a, b).unwrap()
    } else {
        fp::fp_gt(a, b).unwrap()
    };
    let b_wins = if min {
        fp::fp_lt(b, a).unwrap()
    } else {
        fp::fp_gt(b, a).unwrap()
    };
    if a_wins {
        a.clone()
    } else if b_wins {
        b.clone()
    } else if matches!(a.classify(), fp::FpClass::PosZero | fp::FpClass::NegZero)
        && matches!(b.classify(), fp::FpClass::PosZero | fp::FpClass::NegZero)
    {
        let sign = if min {
            a.sign_bit() || b.sign_bit()
        } else {
            a.sign_bit() && b.sign_bit()
        };
        if sign {
            FpBits::negative_zero(a.sort())
        } else {
            FpBits::positive_zero(a.sort())
        }
    } else {
        a.clone()
    }
}
