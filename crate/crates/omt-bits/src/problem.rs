//! Shared problem-domain types: what an optimization instance is, and
//! how objective values are read and compared. Both the engines and the
//! independent oracle build on these, and nothing here runs a search.

use crate::bitvec::{BvConst, BvSort, Direction, Signedness};
use crate::blast::{Sort, Term};
use crate::fp::{FpBits, FpSort, FpValue};
use num::bigint::BigInt;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectiveKind {
    BitVec { sort: BvSort, signedness: Signedness },
    Fp(FpSort),
}

impl ObjectiveKind {
    pub fn width(&self) -> usize {
        match self {
            ObjectiveKind::BitVec { sort, .. } => sort.width(),
            ObjectiveKind::Fp(s) => s.total_bits(),
        }
    }

    pub fn term_sort(&self) -> Sort {
        match self {
            ObjectiveKind::BitVec { sort, .. } => Sort::BitVec(*sort),
            ObjectiveKind::Fp(s) => Sort::Fp(*s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    pub name: String,
    pub direction: Direction,
    pub kind: ObjectiveKind,
}

/// A ready-to-solve problem: declarations, asserted constraints, and the
/// single objective.
#[derive(Debug, Clone)]
pub struct Instance {
    pub declarations: Vec<(String, Sort)>,
    pub assertions: Vec<Term>,
    pub objective: Objective,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveValue {
    BitVec(BigInt),
    Fp(FpValue),
}

impl fmt::Display for ObjectiveValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveValue::BitVec(v) => write!(f, "{v}"),
            ObjectiveValue::Fp(v) => write!(f, "{v}"),
        }
    }
}

pub fn objective_value(kind: &ObjectiveKind, pattern: &[bool]) -> ObjectiveValue {
    match kind {
        ObjectiveKind::BitVec { signedness, .. } => ObjectiveValue::BitVec(
            BvConst::from_bits(pattern.to_vec())
                .expect("non-empty pattern")
                .value(*signedness),
        ),
        ObjectiveKind::Fp(s) => ObjectiveValue::Fp(
            FpBits::from_bits(*s, pattern.to_vec())
                .expect("pattern matches sort")
                .value(),
        ),
    }
}

/// Exact value comparison used for cross-engine and oracle agreement:
/// FP compares by IEEE equality (so -0 and +0 agree and any two NaN
/// payloads agree), BV by integer value.
pub fn values_agree(a: &ObjectiveValue, b: &ObjectiveValue) -> bool {
    match (a, b) {
        (ObjectiveValue::BitVec(x), ObjectiveValue::BitVec(y)) => x == y,
        (ObjectiveValue::Fp(FpValue::Nan), ObjectiveValue::Fp(FpValue::Nan)) => true,
        (ObjectiveValue::Fp(x), ObjectiveValue::Fp(y)) => {
            x.partial_cmp_ieee(y) == Some(std::cmp::Ordering::Equal)
        }
        _ => false,
    }
}

