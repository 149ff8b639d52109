//! Bit-vector sorts, constants, and the attractor machinery driving
//! lexicographic bit-vector optimization.
//!
//! Bits are stored MSB-first: `bits[0]` is the most significant bit and
//! `bits[width-1]` the least significant. Every API in this crate
//! follows that convention, including parsed `#b`/`#x` literals.

use num::bigint::BigInt;
use num::{BigUint, One, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BvError {
    #[error("bit-vector width must be at least 1")]
    ZeroWidth,
    #[error("sort mismatch: width {0} vs width {1}")]
    SortMismatch(usize, usize),
    #[error("malformed bit-vector literal `{0}`")]
    BadLiteral(String),
}

/// A bit-vector sort is just a positive width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BvSort {
    width: usize,
}

impl BvSort {
    pub fn new(width: usize) -> Result<Self, BvError> {
        if width == 0 {
            return Err(BvError::ZeroWidth);
        }
        Ok(BvSort { width })
    }

    pub fn width(&self) -> usize {
        self.width
    }
}

impl fmt::Display for BvSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(_ BitVec {})", self.width)
    }
}

/// How the bit pattern is read as an integer. Signed means two's
/// complement, the only signed encoding supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signedness {
    Unsigned,
    Signed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Minimize => Direction::Maximize,
            Direction::Maximize => Direction::Minimize,
        }
    }
}

/// An interpreted bit-vector value: a fixed-width pattern, MSB-first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BvConst {
    bits: Vec<bool>,
}

impl BvConst {
    /// Builds a constant from MSB-first bits. Empty input is rejected.
    pub fn from_bits(bits: Vec<bool>) -> Result<Self, BvError> {
        if bits.is_empty() {
            return Err(BvError::ZeroWidth);
        }
        Ok(BvConst { bits })
    }

    pub fn zeros(sort: BvSort) -> Self {
        BvConst {
            bits: vec![false; sort.width()],
        }
    }

    pub fn ones(sort: BvSort) -> Self {
        BvConst {
            bits: vec![true; sort.width()],
        }
    }

    /// Truncates `value` to `sort.width()` bits (modulo 2^width).
    pub fn from_biguint(sort: BvSort, value: &BigUint) -> Self {
        let w = sort.width();
        let bits = (0..w)
            .map(|i| value.bit((w - 1 - i) as u64))
            .collect();
        BvConst { bits }
    }

    /// Parses `#b0101` or `#x1C` literals into an MSB-first pattern.
    pub fn parse(text: &str) -> Result<Self, BvError> {
        let bad = || BvError::BadLiteral(text.to_string());
        if let Some(bin) = text.strip_prefix("#b") {
            if bin.is_empty() {
                return Err(bad());
            }
            let mut bits = Vec::with_capacity(bin.len());
            for c in bin.chars() {
                match c {
                    '0' => bits.push(false),
                    '1' => bits.push(true),
                    _ => return Err(bad()),
                }
            }
            BvConst::from_bits(bits)
        } else if let Some(hex) = text.strip_prefix("#x") {
            if hex.is_empty() {
                return Err(bad());
            }
            let mut bits = Vec::with_capacity(hex.len() * 4);
            for c in hex.chars() {
                let d = c.to_digit(16).ok_or_else(bad)?;
                for k in (0..4).rev() {
                    bits.push(d & (1 << k) != 0);
                }
            }
            BvConst::from_bits(bits)
        } else {
            Err(bad())
        }
    }

    pub fn sort(&self) -> BvSort {
        BvSort {
            width: self.bits.len(),
        }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    /// Bit at MSB-first index `k`.
    pub fn bit(&self, k: usize) -> bool {
        self.bits[k]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn complement(&self) -> BvConst {
        BvConst {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn unsigned_value(&self) -> BigUint {
        let mut v = BigUint::zero();
        for &b in &self.bits {
            v <<= 1u8;
            if b {
                v |= BigUint::one();
            }
        }
        v
    }

    /// Exact integer value under the given signedness. Arbitrary
    /// precision: no width fits a machine word by assumption.
    pub fn value(&self, sign: Signedness) -> BigInt {
        let unsigned = BigInt::from(self.unsigned_value());
        match sign {
            Signedness::Unsigned => unsigned,
            Signedness::Signed => {
                if self.bits[0] {
                    unsigned - (BigInt::one() << self.width())
                } else {
                    unsigned
                }
            }
        }
    }
}

impl fmt::Display for BvConst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#b")?;
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// The extremal value of the sort under the given signedness: the target
/// the bit-level search drives the objective toward.
pub fn attractor(sort: BvSort, sign: Signedness, dir: Direction) -> BvConst {
    let w = sort.width();
    let bits = match (sign, dir) {
        (Signedness::Unsigned, Direction::Minimize) => vec![false; w],
        (Signedness::Unsigned, Direction::Maximize) => vec![true; w],
        (Signedness::Signed, Direction::Minimize) => {
            let mut b = vec![false; w];
            b[0] = true;
            b
        }
        (Signedness::Signed, Direction::Maximize) => {
            let mut b = vec![true; w];
            b[0] = false;
            b
        }
    };
    BvConst { bits }
}

/// The per-bit equalities `cost[k] = attr[k]`, ordered MSB to LSB. The
/// search maximizes these lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttractorEqualities {
    attractor: BvConst,
}

impl AttractorEqualities {
    pub fn new(attractor: BvConst) -> Self {
        AttractorEqualities { attractor }
    }

    pub fn attractor(&self) -> &BvConst {
        &self.attractor
    }

    pub fn width(&self) -> usize {
        self.attractor.width()
    }

    /// Target value of bit `k`, i.e. the right-hand side of equality `k`.
    pub fn target(&self, k: usize) -> bool {
        self.attractor.bit(k)
    }

    /// Whether pattern `x` satisfies equality `k`.
    pub fn satisfied(&self, x: &BvConst, k: usize) -> bool {
        x.bit(k) == self.attractor.bit(k)
    }
}

/// True iff `a` beats `b` in the lexicographic order induced by the
/// attractor equalities: at the first MSB-first bit where they disagree,
/// `a` matches the attractor and `b` does not.
pub fn lex_better(a: &BvConst, b: &BvConst, eqs: &AttractorEqualities) -> Result<bool, BvError> {
    if a.width() != b.width() {
        return Err(BvError::SortMismatch(a.width(), b.width()));
    }
    if a.width() != eqs.width() {
        return Err(BvError::SortMismatch(a.width(), eqs.width()));
    }
    for k in 0..a.width() {
        if a.bit(k) != b.bit(k) {
            return Ok(eqs.satisfied(a, k));
        }
    }
    Ok(false)
}

/// Per-bit assumption targets that drive the bit-level search toward the
/// optimum, expressed relative to the minimization attractor of the sort.
/// Minimization aims straight at it; maximization aims at its complement
/// (which is the maximization attractor under two's complement).
pub fn objective_bit_targets(
    width: usize,
    min_attractor: &BvConst,
    dir: Direction,
) -> Result<Vec<bool>, BvError> {
    if width != min_attractor.width() {
        return Err(BvError::SortMismatch(width, min_attractor.width()));
    }
    Ok(match dir {
        Direction::Minimize => min_attractor.bits().to_vec(),
        Direction::Maximize => min_attractor.complement().bits().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(s: &str) -> BvConst {
        BvConst::parse(&format!("#b{s}")).unwrap()
    }

    #[test]
    fn attractor_matches_known_extremes() {
        let s8 = BvSort::new(8).unwrap();
        assert_eq!(
            attractor(s8, Signedness::Unsigned, Direction::Minimize),
            bv("00000000")
        );
        assert_eq!(
            attractor(s8, Signedness::Unsigned, Direction::Maximize),
            bv("11111111")
        );
        // signed -128 and 127
        assert_eq!(
            attractor(s8, Signedness::Signed, Direction::Minimize),
            bv("10000000")
        );
        assert_eq!(
            attractor(s8, Signedness::Signed, Direction::Maximize),
            bv("01111111")
        );
    }

    #[test]
    fn value_reads_both_signednesses() {
        assert_eq!(bv("11111111").value(Signedness::Unsigned), BigInt::from(255));
        assert_eq!(bv("11111111").value(Signedness::Signed), BigInt::from(-1));
        assert_eq!(bv("00000000").value(Signedness::Unsigned), BigInt::from(0));
        assert_eq!(bv("00000000").value(Signedness::Signed), BigInt::from(0));
        assert_eq!(bv("10000000").value(Signedness::Signed), BigInt::from(-128));
    }

    #[test]
    fn parse_binary_and_hex_agree() {
        assert_eq!(BvConst::parse("#x1C").unwrap(), bv("00011100"));
        assert_eq!(BvConst::parse("#b00011100").unwrap().width(), 8);
        assert!(BvConst::parse("#b").is_err());
        assert!(BvConst::parse("#x1G").is_err());
        assert!(BvConst::parse("0b01").is_err());
    }

    #[test]
    fn attractor_is_unique_extremum_exhaustively() {
        for width in 1..=8usize {
            let sort = BvSort::new(width).unwrap();
            for sign in [Signedness::Unsigned, Signedness::Signed] {
                for dir in [Direction::Minimize, Direction::Maximize] {
                    let attr = attractor(sort, sign, dir);
                    for p in 0u32..(1 << width) {
                        let c = BvConst::from_biguint(sort, &BigUint::from(p));
                        if c == attr {
                            continue;
                        }
                        match dir {
                            Direction::Minimize => {
                                assert!(attr.value(sign) < c.value(sign))
                            }
                            Direction::Maximize => {
                                assert!(attr.value(sign) > c.value(sign))
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lex_better_reproduces_signed_three_bit_case() {
        // minimizing a signed 3-bit objective: attractor [100]
        let eqs = AttractorEqualities::new(bv("100"));
        let a = bv("111"); // -1: eq0 sat, eq1 unsat, eq2 unsat
        let b = bv("000"); // 0: eq0 unsat, eq1 sat, eq2 sat
        let c = bv("110"); // -2: eq0 sat, eq1 unsat, eq2 sat
        assert!(lex_better(&a, &b, &eqs).unwrap());
        assert!(!lex_better(&a, &c, &eqs).unwrap());
        assert!(lex_better(&c, &a, &eqs).unwrap());
        assert!(!lex_better(&a, &a, &eqs).unwrap());
        assert!(lex_better(&bv("10"), &bv("01"), &AttractorEqualities::new(bv("10"))).unwrap());
        assert!(matches!(
            lex_better(&bv("10"), &bv("010"), &eqs),
            Err(BvError::SortMismatch(..))
        ));
    }

    /// lex_better embeds into the integer order of the xor-distance to the
    /// attractor, which makes it a strict total order on distinct patterns.
    #[test]
    fn lex_better_is_the_xor_distance_order() {
        for width in 1..=5usize {
            let sort = BvSort::new(width).unwrap();
            for sign in [Signedness::Unsigned, Signedness::Signed] {
                for dir in [Direction::Minimize, Direction::Maximize] {
                    let attr = attractor(sort, sign, dir);
                    let eqs = AttractorEqualities::new(attr.clone());
                    let distance = |x: &BvConst| -> u32 {
                        (0..width)
                            .map(|k| ((x.bit(k) != attr.bit(k)) as u32) << (width - 1 - k))
                            .sum()
                    };
                    for p in 0u32..(1 << width) {
                        for q in 0u32..(1 << width) {
                            let a = BvConst::from_biguint(sort, &BigUint::from(p));
                            let b = BvConst::from_biguint(sort, &BigUint::from(q));
                            assert_eq!(
                                lex_better(&a, &b, &eqs).unwrap(),
                                distance(&a) < distance(&b)
                            );
                        }
                    }
                }
            }
        }
    }

    /// The lex-minimum over all patterns has the extremal integer value.
    #[test]
    fn lex_minimum_attains_the_optimum() {
        for width in 1..=8usize {
            let sort = BvSort::new(width).unwrap();
            for sign in [Signedness::Unsigned, Signedness::Signed] {
                for dir in [Direction::Minimize, Direction::Maximize] {
                    let eqs = AttractorEqualities::new(attractor(sort, sign, dir));
                    let mut best = BvConst::from_biguint(sort, &BigUint::zero());
                    for p in 1u32..(1 << width) {
                        let c = BvConst::from_biguint(sort, &BigUint::from(p));
                        if lex_better(&c, &best, &eqs).unwrap() {
                            best = c;
                        }
                    }
                    assert_eq!(best, attractor(sort, sign, dir));
                }
            }
        }
    }

    #[test]
    fn objective_targets_follow_the_attractor() {
        let s8 = BvSort::new(8).unwrap();
        let min_attr = attractor(s8, Signedness::Signed, Direction::Minimize);
        let t = objective_bit_targets(8, &min_attr, Direction::Minimize).unwrap();
        assert_eq!(t, bv("10000000").bits());
        let u = objective_bit_targets(
            8,
            &attractor(s8, Signedness::Unsigned, Direction::Minimize),
            Direction::Minimize,
        )
        .unwrap();
        assert!(u.iter().all(|&b| !b));
        assert!(objective_bit_targets(4, &min_attr, Direction::Minimize).is_err());
    }

    #[test]
    fn maximize_targets_pick_the_brute_force_argmax() {
        // signed 4-bit, unconstrained: lexicographic optimum over the
        // maximize targets must be the argmax of the integer value.
        let sort = BvSort::new(4).unwrap();
        let min_attr = attractor(sort, Signedness::Signed, Direction::Minimize);
        let targets = objective_bit_targets(4, &min_attr, Direction::Maximize).unwrap();
        let eqs = AttractorEqualities::new(BvConst::from_bits(targets).unwrap());
        let mut lex_best = BvConst::from_biguint(sort, &BigUint::zero());
        let mut argmax = lex_best.clone();
        for p in 1u32..16 {
            let c = BvConst::from_biguint(sort, &BigUint::from(p));
            if lex_better(&c, &lex_best, &eqs).unwrap() {
                lex_best = c.clone();
            }
            if c.value(Signedness::Signed) > argmax.value(Signedness::Signed) {
                argmax = c;
            }
        }
        assert_eq!(lex_best, argmax);
    }

    proptest! {
        #[test]
        fn twos_complement_identity(bits in proptest::collection::vec(any::<bool>(), 1..64)) {
            let c = BvConst::from_bits(bits).unwrap();
            let unsigned = c.value(Signedness::Unsigned);
            let signed = c.value(Signedness::Signed);
            let msb = BigInt::from(c.bit(0) as u8);
            prop_assert_eq!(signed, unsigned - (msb << c.width()));
        }

        #[test]
        fn display_parse_round_trip(bits in proptest::collection::vec(any::<bool>(), 1..64)) {
            let c = BvConst::from_bits(bits).unwrap();
            prop_assert_eq!(BvConst::parse(&c.to_string()).unwrap(), c);
        }
    }
}
