//! IEEE 754 bit-pattern semantics: classification, exact rational
//! valuation, ordering predicates, and the static/dynamic attractors
//! that steer floating-point optimization.
//!
//! No host floating point is used anywhere; finite values are exact
//! `BigRational`s. Patterns are MSB-first: bit 0 is the sign, bits
//! `1..=ebits` the exponent, and the rest the significand fraction
//! (the hidden bit is implicit).

use crate::bitvec::Direction;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{BigUint, One, Zero};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FpError {
    #[error("floating-point sort needs ebits > 1 and sbits > 1, got ({0}, {1})")]
    BadSort(u32, u32),
    #[error("pattern has {0} bits but the sort has {1}")]
    WidthMismatch(usize, usize),
    #[error("sort mismatch between operands")]
    SortMismatch,
    #[error("prefix of {0} bits does not fit in a sort of {1} bits")]
    PrefixTooLong(usize, usize),
    #[error("prefix admits only NaN completions")]
    OnlyNanCompletions,
}

/// `(_ FloatingPoint ebits sbits)`; `sbits` counts the hidden bit, so a
/// pattern has `1 + ebits + (sbits - 1)` bits in total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FpSort {
    ebits: u32,
    sbits: u32,
}

impl FpSort {
    pub fn new(ebits: u32, sbits: u32) -> Result<Self, FpError> {
        if ebits < 2 || sbits < 2 {
            return Err(FpError::BadSort(ebits, sbits));
        }
        Ok(FpSort { ebits, sbits })
    }

    pub fn ebits(&self) -> u32 {
        self.ebits
    }

    pub fn sbits(&self) -> u32 {
        self.sbits
    }

    /// Total pattern width: sign + exponent + stored fraction.
    pub fn total_bits(&self) -> usize {
        (1 + self.ebits + (self.sbits - 1)) as usize
    }

    /// Exponent bias `2^(ebits-1) - 1`.
    pub fn bias(&self) -> BigInt {
        (BigInt::one() << (self.ebits - 1)) - 1
    }
}

impl fmt::Display for FpSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(_ FloatingPoint {} {})", self.ebits, self.sbits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FpClass {
    Nan,
    PosInf,
    NegInf,
    PosZero,
    NegZero,
    Normal,
    Subnormal,
}

/// A raw pattern of some FP sort.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpBits {
    sort: FpSort,
    bits: Vec<bool>,
}

impl FpBits {
    pub fn from_bits(sort: FpSort, bits: Vec<bool>) -> Result<Self, FpError> {
        if bits.len() != sort.total_bits() {
            return Err(FpError::WidthMismatch(bits.len(), sort.total_bits()));
        }
        Ok(FpBits { sort, bits })
    }

    /// Builds a pattern from its `(fp sign exp sig)` component strings of
    /// `0`/`1` characters, e.g. `("0", "110", "1101")`.
    pub fn from_fields(sort: FpSort, sign: &str, exp: &str, sig: &str) -> Result<Self, FpError> {
        let text: String = [sign, exp, sig].concat();
        let bits: Vec<bool> = text
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(FpError::WidthMismatch(0, sort.total_bits())),
            })
            .collect::<Result<_, _>>()?;
        FpBits::from_bits(sort, bits)
    }

    pub fn sort(&self) -> FpSort {
        self.sort
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, k: usize) -> bool {
        self.bits[k]
    }

    pub fn sign_bit(&self) -> bool {
        self.bits[0]
    }

    pub fn exponent_bits(&self) -> &[bool] {
        &self.bits[1..=self.sort.ebits as usize]
    }

    pub fn significand_bits(&self) -> &[bool] {
        &self.bits[1 + self.sort.ebits as usize..]
    }

    pub fn positive_infinity(sort: FpSort) -> Self {
        let mut bits = vec![false; sort.total_bits()];
        for b in bits.iter_mut().take(1 + sort.ebits as usize).skip(1) {
            *b = true;
        }
        FpBits { sort, bits }
    }

    pub fn negative_infinity(sort: FpSort) -> Self {
        let mut v = Self::positive_infinity(sort);
        v.bits[0] = true;
        v
    }

    pub fn positive_zero(sort: FpSort) -> Self {
        FpBits {
            sort,
            bits: vec![false; sort.total_bits()],
        }
    }

    pub fn negative_zero(sort: FpSort) -> Self {
        let mut v = Self::positive_zero(sort);
        v.bits[0] = true;
        v
    }

    pub fn classify(&self) -> FpClass {
        let exp_all_ones = self.exponent_bits().iter().all(|&b| b);
        let exp_all_zeros = self.exponent_bits().iter().all(|&b| !b);
        let sig_zero = self.significand_bits().iter().all(|&b| !b);
        if exp_all_ones {
            if sig_zero {
                if self.sign_bit() {
                    FpClass::NegInf
                } else {
                    FpClass::PosInf
                }
            } else {
                FpClass::Nan
            }
        } else if exp_all_zeros {
            if sig_zero {
                if self.sign_bit() {
                    FpClass::NegZero
                } else {
                    FpClass::PosZero
                }
            } else {
                FpClass::Subnormal
            }
        } else {
            FpClass::Normal
        }
    }

    pub fn is_nan(&self) -> bool {
        self.classify() == FpClass::Nan
    }

    /// Exact value of the pattern.
    pub fn value(&self) -> FpValue {
        match self.classify() {
            FpClass::Nan => FpValue::Nan,
            FpClass::PosInf => FpValue::PosInf,
            FpClass::NegInf => FpValue::NegInf,
            class => {
                let negative = self.sign_bit();
                let bias = self.sort.bias();
                let frac_width = (self.sort.sbits - 1) as usize;
                let mut numer = BigUint::zero();
                for &b in self.significand_bits() {
                    numer <<= 1u8;
                    if b {
                        numer |= BigUint::one();
                    }
                }
                // significand = hidden + numer / 2^frac_width
                let (hidden, exponent) = match class {
                    FpClass::Normal => {
                        let mut e = BigInt::zero();
                        for &b in self.exponent_bits() {
                            e <<= 1;
                            if b {
                                e += 1;
                            }
                        }
                        (BigUint::one(), e - bias)
                    }
                    // zeros and subnormals read the exponent as 1 - bias
                    _ => (BigUint::zero(), BigInt::one() - bias),
                };
                let significand = BigRational::new(
                    BigInt::from((hidden << frac_width) + numer),
                    BigInt::one() << frac_width,
                );
                let magnitude = significand * pow2(exponent);
                FpValue::Finite {
                    value: if negative { -magnitude } else { magnitude },
                    negative,
                }
            }
        }
    }
}

impl fmt::Display for FpBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = |bits: &[bool]| -> String {
            bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
        };
        write!(
            f,
            "(fp #b{} #b{} #b{})",
            field(&[self.sign_bit()]),
            field(self.exponent_bits()),
            field(self.significand_bits())
        )
    }
}

fn pow2(exp: BigInt) -> BigRational {
    use num::ToPrimitive;
    let e = exp.to_i64().expect("exponent fits i64 for any sane sort");
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as u64)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as u64)
    }
}

/// Exact semantic value. Zeros are finite with a remembered sign; only
/// NaN and the infinities are special.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FpValue {
    Nan,
    PosInf,
    NegInf,
    Finite { value: BigRational, negative: bool },
}

impl FpValue {
    pub fn is_nan(&self) -> bool {
        matches!(self, FpValue::Nan)
    }

    /// Total order on non-NaN values with -0 = +0; `None` if either side
    /// is NaN (NaN is unordered).
    pub fn partial_cmp_ieee(&self, other: &FpValue) -> Option<Ordering> {
        use FpValue::*;
        match (self, other) {
            (Nan, _) | (_, Nan) => None,
            (NegInf, NegInf) | (PosInf, PosInf) => Some(Ordering::Equal),
            (NegInf, _) | (_, PosInf) => Some(Ordering::Less),
            (_, NegInf) | (PosInf, _) => Some(Ordering::Greater),
            (Finite { value: a, .. }, Finite { value: b, .. }) => Some(a.cmp(b)),
        }
    }
}

impl fmt::Display for FpValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FpValue::Nan => write!(f, "NaN"),
            FpValue::PosInf => write!(f, "+oo"),
            FpValue::NegInf => write!(f, "-oo"),
            FpValue::Finite { value, negative } => {
                if value.is_zero() {
                    write!(f, "{}0", if *negative { "-" } else { "" })
                } else if value.denom().is_one() {
                    write!(f, "{}", value.numer())
                } else {
                    write!(f, "{}/{}", value.numer(), value.denom())
                }
            }
        }
    }
}

/// `a <= b` in the SMT-LIB sense: false whenever either side is NaN,
/// and -0 equals +0.
pub fn fp_leq(a: &FpBits, b: &FpBits) -> Result<bool, FpError> {
    cmp(a, b).map(|o| matches!(o, Some(Ordering::Less | Ordering::Equal)))
}

pub fn fp_lt(a: &FpBits, b: &FpBits) -> Result<bool, FpError> {
    cmp(a, b).map(|o| matches!(o, Some(Ordering::Less)))
}

pub fn fp_geq(a: &FpBits, b: &FpBits) -> Result<bool, FpError> {
    cmp(a, b).map(|o| matches!(o, Some(Ordering::Greater | Ordering::Equal)))
}

pub fn fp_gt(a: &FpBits, b: &FpBits) -> Result<bool, FpError> {
    cmp(a, b).map(|o| matches!(o, Some(Ordering::Greater)))
}

pub fn fp_eq(a: &FpBits, b: &FpBits) -> Result<bool, FpError> {
    cmp(a, b).map(|o| matches!(o, Some(Ordering::Equal)))
}

fn cmp(a: &FpBits, b: &FpBits) -> Result<Option<Ordering>, FpError> {
    if a.sort() != b.sort() {
        return Err(FpError::SortMismatch);
    }
    Ok(a.value().partial_cmp_ieee(&b.value()))
}

/// A fixed NaN encoding used when the solver has to assert "is a NaN"
/// against a concrete pattern: sign 0, exponent all ones, fraction 10...0.
pub fn canonical_nan(sort: FpSort) -> FpBits {
    let mut bits = vec![false; sort.total_bits()];
    for b in bits.iter_mut().take(1 + sort.ebits() as usize).skip(1) {
        *b = true;
    }
    bits[1 + sort.ebits() as usize] = true;
    FpBits { sort, bits }
}

/// A decision on the `k` most significant bits of the objective,
/// in MSB-first order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixAssignment {
    sort: FpSort,
    decided: Vec<bool>,
}

impl PrefixAssignment {
    pub fn empty(sort: FpSort) -> Self {
        PrefixAssignment {
            sort,
            decided: Vec::new(),
        }
    }

    pub fn from_bits(sort: FpSort, decided: Vec<bool>) -> Result<Self, FpError> {
        if decided.len() > sort.total_bits() {
            return Err(FpError::PrefixTooLong(decided.len(), sort.total_bits()));
        }
        Ok(PrefixAssignment { sort, decided })
    }

    pub fn sort(&self) -> FpSort {
        self.sort
    }

    pub fn len(&self) -> usize {
        self.decided.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decided.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.decided
    }

    pub fn push(&mut self, bit: bool) {
        assert!(self.decided.len() < self.sort.total_bits());
        self.decided.push(bit);
    }

    /// Whether some already-decided exponent bit is 0.
    fn decided_exponent_has_zero(&self) -> bool {
        let e = self.sort.ebits() as usize;
        self.decided
            .iter()
            .enumerate()
            .any(|(i, &b)| i >= 1 && i <= e && !b)
    }
}

/// The extremal non-NaN value the objective can still reach given the
/// decided prefix: the moving target of the bit-level FP search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicAttractor {
    pattern: FpBits,
    basis: PrefixAssignment,
}

impl DynamicAttractor {
    pub fn pattern(&self) -> &FpBits {
        &self.pattern
    }

    pub fn basis(&self) -> &PrefixAssignment {
        &self.basis
    }

    pub fn bit(&self, k: usize) -> bool {
        self.pattern.bit(k)
    }
}

/// Attractor before anything is decided: -oo when minimizing, +oo when
/// maximizing.
pub fn initial_dynamic_attractor(sort: FpSort, dir: Direction) -> DynamicAttractor {
    let pattern = match dir {
        Direction::Minimize => FpBits::negative_infinity(sort),
        Direction::Maximize => FpBits::positive_infinity(sort),
    };
    DynamicAttractor {
        pattern,
        basis: PrefixAssignment::empty(sort),
    }
}

/// Recomputes the attractor for a decided prefix: the smallest
/// (minimizing) or largest (maximizing) non-NaN value extending it.
///
/// Minimizing with a positive sign fills the undecided tail with zeros
/// (smallest positive); with a negative sign it fills with ones when some
/// decided exponent bit is 0 (largest-magnitude negative) and otherwise
/// extends toward -oo. Maximization is the sign-dual. A prefix all of
/// whose completions are NaN is rejected; the search never produces one.
pub fn update_dynamic_attractor(
    prefix: &PrefixAssignment,
    dir: Direction,
) -> Result<DynamicAttractor, FpError> {
    let sort = prefix.sort();
    if prefix.is_empty() {
        return Ok(initial_dynamic_attractor(sort, dir));
    }
    let n = sort.total_bits();
    let mut bits = prefix.bits().to_vec();
    let negative = bits[0];
    let toward_zero = match dir {
        Direction::Minimize => !negative,
        Direction::Maximize => negative,
    };
    if toward_zero {
        bits.resize(n, false);
    } else if prefix.decided_exponent_has_zero() {
        bits.resize(n, true);
    } else {
        // all decided exponent bits are 1: the extremum is the infinity,
        // reached by completing the exponent with ones and the fraction
        // with zeros.
        let e = sort.ebits() as usize;
        while bits.len() < n {
            bits.push(bits.len() <= e);
        }
    }
    let pattern = FpBits::from_bits(sort, bits)?;
    if pattern.is_nan() {
        return Err(FpError::OnlyNanCompletions);
    }
    Ok(DynamicAttractor {
        pattern,
        basis: prefix.clone(),
    })
}

/// Outcome of one bit decision in the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitOutcome {
    Sat,
    Unsat,
}

/// One record per objective bit: which attractor was in force, which bit
/// value it asked for, and whether that was feasible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryStep {
    pub bit: usize,
    pub attractor: Vec<bool>,
    pub target: bool,
    pub outcome: BitOutcome,
}

/// The sequence of critical attractor equalities actually driving a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trajectory {
    steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    pub fn new() -> Self {
        Trajectory { steps: Vec::new() }
    }

    pub fn record(&mut self, step: TrajectoryStep) {
        if let Some(last) = self.steps.last() {
            assert!(step.bit == last.bit + 1, "trajectory records out of order");
        } else {
            assert!(step.bit == 0, "trajectory must start at the MSB");
        }
        self.steps.push(step);
    }

    pub fn steps(&self) -> &[TrajectoryStep] {
        &self.steps
    }
}
