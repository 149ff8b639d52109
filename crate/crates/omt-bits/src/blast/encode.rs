//! Lowers formulas onto the SAT solver: Tseitin gates for the boolean
//! skeleton, ripple-carry/shift-add word circuits, and NaN-aware FP
//! comparison circuits built on the monotone sign-magnitude key
//! transform (flip the sign bit's view of the remaining bits so that
//! unsigned comparison of keys is the IEEE order).

use super::ast::{Sort, Term, TermKind};
use crate::sat::{Lit, Model, SatResult, Solver, Var};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlastError {
    #[error("unsupported operator `{0}`")]
    Unsupported(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` redeclared")]
    Redeclared(String),
    #[error("bit index {index} out of range for `{name}` of width {width}")]
    BitIndexOutOfRange {
        name: String,
        index: usize,
        width: usize,
    },
    #[error("expected a boolean term, got sort {0}")]
    NotBoolean(String),
}

/// Stable mapping from declared variables to their SAT variables
/// (MSB-first for word sorts). The mapping never changes once a variable
/// is declared, so objective bits can be assumed across solves.
#[derive(Debug, Default, Clone)]
pub struct BlastMap {
    word_bits: HashMap<String, Vec<Var>>,
    bools: HashMap<String, Var>,
}

impl BlastMap {
    pub fn word_bits(&self, name: &str) -> Option<&[Var]> {
        self.word_bits.get(name).map(|v| v.as_slice())
    }

    pub fn bool_var(&self, name: &str) -> Option<Var> {
        self.bools.get(name).copied()
    }

    pub fn word_names(&self) -> Vec<(String, usize)> {
        self.word_bits
            .iter()
            .map(|(k, v)| (k.clone(), v.len()))
            .collect()
    }

    pub fn bool_names(&self) -> Vec<(String, Var)> {
        self.bools.iter().map(|(k, &v)| (k.clone(), v)).collect()
    }

    /// The assumption literal asserting bit `index` of `name` equals
    /// `value` (index 0 is the MSB).
    pub fn bit_lit(&self, name: &str, index: usize, value: bool) -> Result<Lit, BlastError> {
        let bits = self
            .word_bits
            .get(name)
            .ok_or_else(|| BlastError::UnknownVariable(name.to_string()))?;
        if index >= bits.len() {
            return Err(BlastError::BitIndexOutOfRange {
                name: name.to_string(),
                index,
                width: bits.len(),
            });
        }
        Ok(Lit::new(bits[index], value))
    }

    /// Projects the pattern of a declared word variable out of a model.
    pub fn pattern(&self, name: &str, model: &Model) -> Result<Vec<bool>, BlastError> {
        let bits = self
            .word_bits
            .get(name)
            .ok_or_else(|| BlastError::UnknownVariable(name.to_string()))?;
        Ok(bits.iter().map(|&v| model.value(v)).collect())
    }
}

/// How a word variable's bits are mapped to the monotone unsigned key
/// whose order mirrors the sort's value order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyTransform {
    /// unsigned bit-vectors: the pattern is its own key
    Identity,
    /// two's-complement bit-vectors: flip the sign bit
    FlipSign,
    /// IEEE patterns: flip the sign bit and, for negatives, the rest
    FpOrder,
}

/// Incremental bit-blaster that owns its SAT solver. Declared variable
/// bits are allocated eagerly; asserted formulas become permanent
/// clauses; `reify` returns a literal equivalent to a boolean term so
/// engines can use it as a retractable assumption.
pub struct Encoder {
    solver: Solver,
    map: BlastMap,
    word_cache: HashMap<Term, Vec<Lit>>,
    bool_cache: HashMap<Term, Lit>,
    true_lit: Lit,
}

impl Default for Encoder {
    fn default() -> Self {
        Encoder::new()
    }
}

impl Encoder {
    pub fn new() -> Self {
        let mut solver = Solver::new();
        let t = solver.new_var();
        let true_lit = Lit::positive(t);
        solver.add_clause(&[true_lit]);
        Encoder {
            solver,
            map: BlastMap::default(),
            word_cache: HashMap::new(),
            bool_cache: HashMap::new(),
            true_lit,
        }
    }

    pub fn map(&self) -> &BlastMap {
        &self.map
    }

    pub fn solver(&mut self) -> &mut Solver {
        &mut self.solver
    }

    pub fn solve_calls(&self) -> u64 {
        self.solver.solve_calls()
    }

    pub fn solve(&mut self, assumptions: &[Lit]) -> SatResult {
        self.solver.solve(assumptions)
    }

    pub fn declare(&mut self, name: &str, sort: Sort) -> Result<(), BlastError> {
        if self.map.bools.contains_key(name) || self.map.word_bits.contains_key(name) {
            return Err(BlastError::Redeclared(name.to_string()));
        }
        match sort {
            Sort::Bool => {
                let v = self.solver.new_var();
                self.map.bools.insert(name.to_string(), v);
            }
            _ => {
                let width = sort.bit_width().unwrap();
                let vars: Vec<Var> = (0..width).map(|_| self.solver.new_var()).collect();
                self.map.word_bits.insert(name.to_string(), vars);
            }
        }
        Ok(())
    }

    /// Asserts a boolean term as permanent clauses.
    pub fn assert_term(&mut self, t: &Term) -> Result<(), BlastError> {
        let l = self.reify(t)?;
        self.solver.add_clause(&[l]);
        Ok(())
    }

    /// Returns a literal equivalent to the boolean term without asserting
    /// it; usable as a solve assumption.
    pub fn reify(&mut self, t: &Term) -> Result<Lit, BlastError> {
        if t.sort() != Sort::Bool {
            return Err(BlastError::NotBoolean(t.sort().to_string()));
        }
        self.lit_of(t)
    }

    /// Reifies the strict key-order comparison between a declared word
    /// variable and a constant key: `key(var) > boundary` when `greater`,
    /// `key(var) < boundary` otherwise. `boundary` is already in key
    /// space, MSB-first.
    pub fn reify_key_compare(
        &mut self,
        name: &str,
        transform: KeyTransform,
        boundary: &[bool],
        greater: bool,
    ) -> Result<Lit, BlastError> {
        let vars = self
            .map
            .word_bits(name)
            .ok_or_else(|| BlastError::UnknownVariable(name.to_string()))?
            .to_vec();
        let bits: Vec<Lit> = vars.iter().map(|&v| Lit::positive(v)).collect();
        let key = match transform {
            KeyTransform::Identity => bits,
            KeyTransform::FlipSign => {
                let mut b = bits;
                b[0] = !b[0];
                b
            }
            KeyTransform::FpOrder => self.fp_key(&bits),
        };
        let konst: Vec<Lit> = boundary.iter().map(|&b| self.const_lit(b)).collect();
        Ok(if greater {
            self.ult_words(&konst, &key)
        } else {
            self.ult_words(&key, &konst)
        })
    }

    fn false_lit(&self) -> Lit {
        !self.true_lit
    }

    fn const_lit(&self, b: bool) -> Lit {
        if b {
            self.true_lit
        } else {
            self.false_lit()
        }
    }

    fn fresh(&mut self) -> Lit {
        Lit::positive(self.solver.new_var())
    }

    // ---- gates ----------------------------------------------------------

    fn mk_not(&mut self, a: Lit) -> Lit {
        !a
    }

    fn mk_and(&mut self, a: Lit, b: Lit) -> Lit {
        if a == self.false_lit() || b == self.false_lit() || a == !b {
            return self.false_lit();
        }
        if a == self.true_lit || a == b {
            return b;
        }
        if b == self.true_lit {
            return a;
        }
        let r = self.fresh();
        self.solver.add_clause(&[!r, a]);
        self.solver.add_clause(&[!r, b]);
        self.solver.add_clause(&[!a, !b, r]);
        r
    }

    fn mk_or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.mk_and(!a, !b)
    }

    fn mk_and_many(&mut self, lits: &[Lit]) -> Lit {
        let mut acc = self.true_lit;
        for &l in lits {
            acc = self.mk_and(acc, l);
        }
        acc
    }

    fn mk_or_many(&mut self, lits: &[Lit]) -> Lit {
        let mut acc = self.false_lit();
        for &l in lits {
            acc = self.mk_or(acc, l);
        }
        acc
    }

    fn mk_xor(&mut self, a: Lit, b: Lit) -> Lit {
        if a == self.false_lit() {
            return b;
        }
        if b == self.false_lit() {
            return a;
        }
        if a == self.true_lit {
            return !b;
        }
        if b == self.true_lit {
            return !a;
        }
        if a == b {
            return self.false_lit();
        }
        if a == !b {
            return self.true_lit;
        }
        let r = self.fresh();
        self.solver.add_clause(&[!a, !b, !r]);
        self.solver.add_clause(&[a, b, !r]);
        self.solver.add_clause(&[!a, b, r]);
        self.solver.add_clause(&[a, !b, r]);
        r
    }

    fn mk_iff(&mut self, a: Lit, b: Lit) -> Lit {
        !self.mk_xor(a, b)
    }

    fn mk_ite(&mut self, c: Lit, t: Lit, e: Lit) -> Lit {
        if c == self.true_lit {
            return t;
        }
        if c == self.false_lit() {
            return e;
        }
        if t == e {
            return t;
        }
        let r = self.fresh();
        self.solver.add_clause(&[!c, !t, r]);
        self.solver.add_clause(&[!c, t, !r]);
        self.solver.add_clause(&[c, !e, r]);
        self.solver.add_clause(&[c, e, !r]);
        self.solver.add_clause(&[!t, !e, r]);
        self.solver.add_clause(&[t, e, !r]);
        r
    }

    fn mk_full_adder(&mut self, a: Lit, b: Lit, cin: Lit) -> (Lit, Lit) {
        let axb = self.mk_xor(a, b);
        let sum = self.mk_xor(axb, cin);
        let ab = self.mk_and(a, b);
        let c_in_axb = self.mk_and(cin, axb);
        let cout = self.mk_or(ab, c_in_axb);
        (sum, cout)
    }

    // ---- word circuits (bit vectors are MSB-first) -----------------------

    fn add_words(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        let mut out = vec![self.false_lit(); w];
        let mut carry = self.false_lit();
        for i in (0..w).rev() {
            let (s, c) = self.mk_full_adder(a[i], b[i], carry);
            out[i] = s;
            carry = c;
        }
        out
    }

    fn mul_words(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        let mut acc = vec![self.false_lit(); w];
        for j in 0..w {
            // partial product of a shifted left by j, masked by LSB j of b
            let b_j = b[w - 1 - j];
            let mut partial = vec![self.false_lit(); w];
            for i in 0..w - j {
                partial[i] = self.mk_and(a[i + j], b_j);
            }
            acc = self.add_words(&acc, &partial);
        }
        acc
    }

    fn shift_words(&mut self, a: &[Lit], sh: &[Lit], left: bool) -> Vec<Lit> {
        let w = a.len();
        let mut stages = 0usize;
        while (1usize << stages) < w {
            stages += 1;
        }
        let mut cur = a.to_vec();
        for k in 0..stages {
            let amount = 1usize << k;
            let sel = sh[w - 1 - k];
            let shifted: Vec<Lit> = (0..w)
                .map(|i| {
                    if left {
                        if i + amount < w {
                            cur[i + amount]
                        } else {
                            self.false_lit()
                        }
                    } else if i >= amount {
                        cur[i - amount]
                    } else {
                        self.false_lit()
                    }
                })
                .collect();
            cur = (0..w).map(|i| self.mk_ite(sel, shifted[i], cur[i])).collect();
        }
        // any set shift bit at weight >= w zeroes the result
        let high: Vec<Lit> = (0..w)
            .filter(|&k| k >= stages || (1usize << k) >= w)
            .map(|k| sh[w - 1 - k])
            .collect();
        let overflow = self.mk_or_many(&high);
        cur.iter()
            .map(|&l| {
                let z = self.false_lit();
                self.mk_ite(overflow, z, l)
            })
            .collect()
    }

    fn ult_words(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        // fold from the LSB: at each more significant bit the comparison
        // is decided there unless the bits agree
        let mut lt = self.false_lit();
        for i in (0..a.len()).rev() {
            let na = self.mk_not(a[i]);
            let here = self.mk_and(na, b[i]);
            let eq = self.mk_iff(a[i], b[i]);
            let keep = self.mk_and(eq, lt);
            lt = self.mk_or(here, keep);
        }
        lt
    }

    fn ule_words(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let gt = self.ult_words(b, a);
        !gt
    }

    fn flip_msb(&mut self, a: &[Lit]) -> Vec<Lit> {
        let mut out = a.to_vec();
        out[0] = !out[0];
        out
    }

    fn eq_words(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let iffs: Vec<Lit> = (0..a.len())
            .map(|i| self.mk_iff(a[i], b[i]))
            .collect();
        self.mk_and_many(&iffs)
    }

    fn mux_words(&mut self, c: Lit, t: &[Lit], e: &[Lit]) -> Vec<Lit> {
        (0..t.len()).map(|i| self.mk_ite(c, t[i], e[i])).collect()
    }

    // ---- floating-point helpers ------------------------------------------

    /// Monotone key: unsigned comparison of keys is the IEEE order on
    /// non-NaN patterns, with -0 ordered just below +0.
    fn fp_key(&mut self, bits: &[Lit]) -> Vec<Lit> {
        let sign = bits[0];
        let mut key = Vec::with_capacity(bits.len());
        key.push(!sign);
        for &b in &bits[1..] {
            key.push(self.mk_xor(b, sign));
        }
        key
    }

    fn fp_fields(bits: &[Lit], ebits: usize) -> (Lit, &[Lit], &[Lit]) {
        (bits[0], &bits[1..=ebits], &bits[ebits + 1..])
    }

    fn fp_is_nan(&mut self, bits: &[Lit], ebits: usize) -> Lit {
        let (_, exp, sig) = Self::fp_fields(bits, ebits);
        let (exp, sig) = (exp.to_vec(), sig.to_vec());
        let exp_ones = self.mk_and_many(&exp);
        let sig_nonzero = self.mk_or_many(&sig);
        self.mk_and(exp_ones, sig_nonzero)
    }

    fn fp_is_zero(&mut self, bits: &[Lit], ebits: usize) -> Lit {
        let (_, exp, sig) = Self::fp_fields(bits, ebits);
        let all: Vec<Lit> = exp.iter().chain(sig.iter()).map(|&l| !l).collect();
        self.mk_and_many(&all)
    }

    // ---- term lowering ----------------------------------------------------

    fn lit_of(&mut self, t: &Term) -> Result<Lit, BlastError> {
        if let Some(&l) = self.bool_cache.get(t) {
            return Ok(l);
        }
        use TermKind::*;
        let l = match t.kind() {
            True => self.true_lit,
            False => self.false_lit(),
            BoolVar(n) => Lit::positive(
                self.map
                    .bool_var(n)
                    .ok_or_else(|| BlastError::UnknownVariable(n.clone()))?,
            ),
            Not(x) => {
                let a = self.lit_of(x)?;
                self.mk_not(a)
            }
            And(ts) => {
                let lits = ts
                    .iter()
                    .map(|x| self.lit_of(x))
                    .collect::<Result<Vec<_>, _>>()?;
                self.mk_and_many(&lits)
            }
            Or(ts) => {
                let lits = ts
                    .iter()
                    .map(|x| self.lit_of(x))
                    .collect::<Result<Vec<_>, _>>()?;
                self.mk_or_many(&lits)
            }
            Xor(x, y) => {
                let a = self.lit_of(x)?;
                let b = self.lit_of(y)?;
                self.mk_xor(a, b)
            }
            Implies(x, y) => {
                let a = self.lit_of(x)?;
                let b = self.lit_of(y)?;
                self.mk_or(!a, b)
            }
            Eq(x, y) => match x.sort() {
                Sort::Bool => {
                    let a = self.lit_of(x)?;
                    let b = self.lit_of(y)?;
                    self.mk_iff(a, b)
                }
                // word equality, and FP `=` is bit-pattern identity
                _ => {
                    let a = self.bits_of(x)?;
                    let b = self.bits_of(y)?;
                    self.eq_words(&a, &b)
                }
            },
            Ite(c, x, y) => {
                let cl = self.lit_of(c)?;
                let a = self.lit_of(x)?;
                let b = self.lit_of(y)?;
                self.mk_ite(cl, a, b)
            }
            BvUlt(x, y) => {
                let (a, b) = (self.bits_of(x)?, self.bits_of(y)?);
                self.ult_words(&a, &b)
            }
            BvUle(x, y) => {
                let (a, b) = (self.bits_of(x)?, self.bits_of(y)?);
                self.ule_words(&a, &b)
            }
            BvUgt(x, y) => {
                let (a, b) = (self.bits_of(x)?, self.bits_of(y)?);
                self.ult_words(&b, &a)
            }
            BvUge(x, y) => {
                let (a, b) = (self.bits_of(x)?, self.bits_of(y)?);
                self.ule_words(&b, &a)
            }
            BvSlt(x, y) => {
                let (a, b) = (self.bits_of(x)?, self.bits_of(y)?);
                let (fa, fb) = (self.flip_msb(&a), self.flip_msb(&b));
                self.ult_words(&fa, &fb)
            }
            BvSle(x, y) => {
                let (a, b) = (self.bits_of(x)?, self.bits_of(y)?);
                let (fa, fb) = (self.flip_msb(&a), self.flip_msb(&b));
                self.ule_words(&fa, &fb)
            }
            BvSgt(x, y) => {
                let (a, b) = (self.bits_of(x)?, self.bits_of(y)?);
                let (fa, fb) = (self.flip_msb(&a), self.flip_msb(&b));
                self.ult_words(&fb, &fa)
            }
            BvSge(x, y) => {
                let (a, b) = (self.bits_of(x)?, self.bits_of(y)?);
                let (fa, fb) = (self.flip_msb(&a), self.flip_msb(&b));
                self.ule_words(&fb, &fa)
            }
            FpEq(x, y) | FpLt(x, y) | FpLeq(x, y) | FpGt(x, y) | FpGeq(x, y) => {
                let ebits = match x.sort() {
                    Sort::Fp(s) => s.ebits() as usize,
                    _ => unreachable!("well-sorted term"),
                };
                // normalize gt/geq by swapping operands
                let (x, y) = match t.kind() {
                    FpGt(..) | FpGeq(..) => (y, x),
                    _ => (x, y),
                };
                let a = self.bits_of(x)?;
                let b = self.bits_of(y)?;
                let a_nan = self.fp_is_nan(&a, ebits);
                let b_nan = self.fp_is_nan(&b, ebits);
                let no_nan = {
                    let n = self.mk_or(a_nan, b_nan);
                    !n
                };
                let a_zero = self.fp_is_zero(&a, ebits);
                let b_zero = self.fp_is_zero(&b, ebits);
                let both_zero = self.mk_and(a_zero, b_zero);
                let ka = self.fp_key(&a);
                let kb = self.fp_key(&b);
                match t.kind() {
                    FpEq(..) => {
                        let same_bits = self.eq_words(&a, &b);
                        let eq = self.mk_or(both_zero, same_bits);
                        self.mk_and(no_nan, eq)
                    }
                    FpLt(..) | FpGt(..) => {
                        let lt = self.ult_words(&ka, &kb);
                        let strict = {
                            let nz = !both_zero;
                            self.mk_and(lt, nz)
                        };
                        self.mk_and(no_nan, strict)
                    }
                    _ => {
                        let le = self.ule_words(&ka, &kb);
                        let lax = self.mk_or(le, both_zero);
                        self.mk_and(no_nan, lax)
                    }
                }
            }
            FpIsNan(x) | FpIsInf(x) | FpIsZero(x) | FpIsNormal(x) | FpIsSubnormal(x)
            | FpIsNegative(x) | FpIsPositive(x) => {
                let ebits = match x.sort() {
                    Sort::Fp(s) => s.ebits() as usize,
                    _ => unreachable!("well-sorted term"),
                };
                let bits = self.bits_of(x)?;
                let (sign, exp, sig) = Self::fp_fields(&bits, ebits);
                let exp = exp.to_vec();
                let sig = sig.to_vec();
                let exp_ones = self.mk_and_many(&exp);
                let exp_zero = {
                    let inv: Vec<Lit> = exp.iter().map(|&l| !l).collect();
                    self.mk_and_many(&inv)
                };
                let sig_zero = {
                    let inv: Vec<Lit> = sig.iter().map(|&l| !l).collect();
                    self.mk_and_many(&inv)
                };
                match t.kind() {
                    FpIsNan(_) => {
                        let nz = !sig_zero;
                        self.mk_and(exp_ones, nz)
                    }
                    FpIsInf(_) => self.mk_and(exp_ones, sig_zero),
                    FpIsZero(_) => self.mk_and(exp_zero, sig_zero),
                    FpIsNormal(_) => {
                        let a = !exp_ones;
                        let b = !exp_zero;
                        self.mk_and(a, b)
                    }
                    FpIsSubnormal(_) => {
                        let nz = !sig_zero;
                        self.mk_and(exp_zero, nz)
                    }
                    FpIsNegative(_) => {
                        let nz = !sig_zero;
                        let nan = self.mk_and(exp_ones, nz);
                        self.mk_and(sign, !nan)
                    }
                    _ => {
                        let nz = !sig_zero;
                        let nan = self.mk_and(exp_ones, nz);
                        let ns = !sign;
                        self.mk_and(ns, !nan)
                    }
                }
            }
            _ => unreachable!("lit_of on a word-sorted term"),
        };
        self.bool_cache.insert(t.clone(), l);
        Ok(l)
    }

    fn bits_of(&mut self, t: &Term) -> Result<Vec<Lit>, BlastError> {
        if let Some(bits) = self.word_cache.get(t) {
            return Ok(bits.clone());
        }
        use TermKind::*;
        let bits = match t.kind() {
            BvLit(c) => c.bits().iter().map(|&b| self.const_lit(b)).collect(),
            FpLit(c) => c.bits().iter().map(|&b| self.const_lit(b)).collect(),
            BvVar(n, _) | FpVar(n, _) => self
                .map
                .word_bits(n)
                .ok_or_else(|| BlastError::UnknownVariable(n.clone()))?
                .iter()
                .map(|&v| Lit::positive(v))
                .collect(),
            BvNot(x) => self.bits_of(x)?.iter().map(|&l| !l).collect(),
            BvAnd(x, y) | BvOr(x, y) | BvXor(x, y) | BvNxor(x, y) => {
                let a = self.bits_of(x)?;
                let b = self.bits_of(y)?;
                let mut out = Vec::with_capacity(a.len());
                for i in 0..a.len() {
                    out.push(match t.kind() {
                        BvAnd(..) => self.mk_and(a[i], b[i]),
                        BvOr(..) => self.mk_or(a[i], b[i]),
                        BvXor(..) => self.mk_xor(a[i], b[i]),
                        _ => self.mk_iff(a[i], b[i]),
                    });
                }
                out
            }
            BvAdd(x, y) => {
                let a = self.bits_of(x)?;
                let b = self.bits_of(y)?;
                self.add_words(&a, &b)
            }
            BvMul(x, y) => {
                let a = self.bits_of(x)?;
                let b = self.bits_of(y)?;
                self.mul_words(&a, &b)
            }
            BvShl(x, y) => {
                let a = self.bits_of(x)?;
                let b = self.bits_of(y)?;
                self.shift_words(&a, &b, true)
            }
            BvLshr(x, y) => {
                let a = self.bits_of(x)?;
                let b = self.bits_of(y)?;
                self.shift_words(&a, &b, false)
            }
            Concat(x, y) => {
                let mut a = self.bits_of(x)?;
                a.extend(self.bits_of(y)?);
                a
            }
            Extract { hi, lo, arg } => {
                let a = self.bits_of(arg)?;
                let n = a.len();
                a[n - 1 - *hi as usize..=n - 1 - *lo as usize].to_vec()
            }
            Ite(c, x, y) => {
                let cl = self.lit_of(c)?;
                let a = self.bits_of(x)?;
                let b = self.bits_of(y)?;
                self.mux_words(cl, &a, &b)
            }
            FpNeg(x) => {
                let mut a = self.bits_of(x)?;
                a[0] = !a[0];
                a
            }
            FpAbs(x) => {
                let mut a = self.bits_of(x)?;
                a[0] = self.false_lit();
                a
            }
            FpMin(x, y) | FpMax(x, y) => {
                let (sort, min) = match (x.sort(), t.kind()) {
                    (Sort::Fp(s), FpMin(..)) => (s, true),
                    (Sort::Fp(s), _) => (s, false),
                    _ => unreachable!("well-sorted term"),
                };
                let ebits = sort.ebits() as usize;
                let a = self.bits_of(x)?;
                let b = self.bits_of(y)?;
                let a_nan = self.fp_is_nan(&a, ebits);
                let b_nan = self.fp_is_nan(&b, ebits);
                let ka = self.fp_key(&a);
                let kb = self.fp_key(&b);
                let a_zero = self.fp_is_zero(&a, ebits);
                let b_zero = self.fp_is_zero(&b, ebits);
                let both_zero = self.mk_and(a_zero, b_zero);
                let (a_wins, b_wins) = if min {
                    let alt = self.ult_words(&ka, &kb);
                    let blt = self.ult_words(&kb, &ka);
                    (alt, blt)
                } else {
                    let agt = self.ult_words(&kb, &ka);
                    let bgt = self.ult_words(&ka, &kb);
                    (agt, bgt)
                };
                // when both are zeros: min picks -0 when either sign is
                // set, max picks +0 unless both are -0
                let merged_zero: Vec<Lit> = {
                    let sign = if min {
                        self.mk_or(a[0], b[0])
                    } else {
                        self.mk_and(a[0], b[0])
                    };
                    let mut z = vec![self.false_lit(); a.len()];
                    z[0] = sign;
                    z
                };
                let tie = self.mux_words(both_zero, &merged_zero, &a);
                // zeros of opposite sign compare equal in key order only
                // through the explicit both_zero branch
                let a_strict = {
                    let nz = !both_zero;
                    self.mk_and(a_wins, nz)
                };
                let b_strict = {
                    let nz = !both_zero;
                    self.mk_and(b_wins, nz)
                };
                let pick_b = self.mux_words(b_strict, &b, &tie);
                let pick_a = self.mux_words(a_strict, &a, &pick_b);
                let no_b = self.mux_words(b_nan, &a, &pick_a);
                self.mux_words(a_nan, &b, &no_b)
            }
            _ => unreachable!("bits_of on a boolean term"),
        };
        self.word_cache.insert(t.clone(), bits.clone());
        Ok(bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitvec::{BvConst, BvSort};
    use crate::blast::ast::{eval_bool, Assignment};
    use crate::fp::{self, FpBits, FpSort};

    fn bv_term(s: &str) -> Term {
        Term::bv_lit(BvConst::parse(&format!("#b{s}")).unwrap())
    }

    fn index_bits(p: u64, n: usize) -> Vec<bool> {
        (0..n).map(|i| p & (1 << (n - 1 - i)) != 0).collect()
    }

    /// Counts satisfying patterns of the declared word variables by
    /// assumption-pinning each candidate, and checks the count and the
    /// membership against the semantic evaluator.
    fn check_against_evaluator(enc: &mut Encoder, formula: &Term, vars: &[(&str, usize)]) {
        enc.assert_term(formula).expect("blast");
        let total: usize = vars.iter().map(|(_, w)| w).sum();
        assert!(total <= 14, "exhaustive check is meant for small spaces");
        for p in 0u64..(1 << total) {
            let all = index_bits(p, total);
            let mut offset = 0;
            let mut assumptions = Vec::new();
            let mut assignment = Assignment::default();
            for (name, w) in vars {
                let chunk = &all[offset..offset + w];
                for (i, &b) in chunk.iter().enumerate() {
                    assumptions.push(enc.map().bit_lit(name, i, b).unwrap());
                }
                assignment.bind_word(*name, chunk.to_vec());
                offset += w;
            }
            let expected = eval_bool(formula, &assignment).unwrap();
            let got = enc.solve(&assumptions).is_sat();
            assert_eq!(got, expected, "pattern {all:?} of {formula}");
        }
    }

    #[test]
    fn addition_circuit_matches_semantics() {
        let s = BvSort::new(2).unwrap();
        let mut enc = Encoder::new();
        enc.declare("x", Sort::BitVec(s)).unwrap();
        enc.declare("y", Sort::BitVec(s)).unwrap();
        let x = Term::bv_var("x", s);
        let y = Term::bv_var("y", s);
        let sum = Term::new(TermKind::BvAdd(x, y)).unwrap();
        let f = Term::eq(sum, bv_term("00")).unwrap();
        // exactly the 4 pairs summing to 0 mod 4 satisfy it
        let mut enc2 = Encoder::new();
        enc2.declare("x", Sort::BitVec(s)).unwrap();
        enc2.declare("y", Sort::BitVec(s)).unwrap();
        enc2.assert_term(&f).unwrap();
        let mut count = 0;
        for p in 0u64..16 {
            let bits = index_bits(p, 4);
            let mut assumptions = Vec::new();
            for i in 0..2 {
                assumptions.push(enc2.map().bit_lit("x", i, bits[i]).unwrap());
                assumptions.push(enc2.map().bit_lit("y", i, bits[2 + i]).unwrap());
            }
            if enc2.solve(&assumptions).is_sat() {
                count += 1;
            }
        }
        assert_eq!(count, 4);
        check_against_evaluator(&mut enc, &f, &[("x", 2), ("y", 2)]);
    }

    #[test]
    fn mixed_bv_operations_match_semantics() {
        let s = BvSort::new(3).unwrap();
        let x = Term::bv_var("x", s);
        let y = Term::bv_var("y", s);
        use TermKind::*;
        let product = Term::new(BvMul(x.clone(), y.clone())).unwrap();
        let shifted = Term::new(BvShl(x.clone(), y.clone())).unwrap();
        let f = Term::or(vec![
            Term::new(BvUlt(product, bv_term("011"))).unwrap(),
            Term::new(Eq(shifted, bv_term("100"))).unwrap(),
            Term::new(BvSge(Term::new(BvLshr(y.clone(), x.clone())).unwrap(), y.clone()))
                .unwrap(),
        ]);
        let mut enc = Encoder::new();
        enc.declare("x", Sort::BitVec(s)).unwrap();
        enc.declare("y", Sort::BitVec(s)).unwrap();
        check_against_evaluator(&mut enc, &f, &[("x", 3), ("y", 3)]);
    }

    #[test]
    fn concat_extract_and_bitwise_match_semantics() {
        let s = BvSort::new(3).unwrap();
        let x = Term::bv_var("x", s);
        let y = Term::bv_var("y", s);
        use TermKind::*;
        let cat = Term::new(Concat(x.clone(), y.clone())).unwrap();
        let mid = Term::new(Extract {
            hi: 4,
            lo: 2,
            arg: cat,
        })
        .unwrap();
        let mask = Term::new(BvAnd(x.clone(), Term::new(BvNot(y.clone())).unwrap())).unwrap();
        let f = Term::and(vec![
            Term::new(BvUle(mid, bv_term("101"))).unwrap(),
            Term::negate(Term::eq(mask, bv_term("000")).unwrap()),
            Term::new(Xor(
                Term::new(BvSlt(x.clone(), y.clone())).unwrap(),
                Term::new(Eq(
                    Term::new(BvNxor(x.clone(), y.clone())).unwrap(),
                    bv_term("111"),
                ))
                .unwrap(),
            ))
            .unwrap(),
        ]);
        let mut enc = Encoder::new();
        enc.declare("x", Sort::BitVec(s)).unwrap();
        enc.declare("y", Sort::BitVec(s)).unwrap();
        check_against_evaluator(&mut enc, &f, &[("x", 3), ("y", 3)]);
    }

    #[test]
    fn nothing_lies_below_negative_infinity() {
        let s = FpSort::new(3, 5).unwrap();
        let mut enc = Encoder::new();
        enc.declare("c", Sort::Fp(s)).unwrap();
        let c = Term::fp_var("c", s);
        let f = Term::new(TermKind::FpLeq(
            c,
            Term::fp_lit(FpBits::negative_infinity(s)),
        ))
        .unwrap();
        enc.assert_term(&f).unwrap();
        let mut sat_patterns = Vec::new();
        for p in 0u64..256 {
            let bits = index_bits(p, 8);
            let assumptions: Vec<_> = (0..8)
                .map(|i| enc.map().bit_lit("c", i, bits[i]).unwrap())
                .collect();
            if enc.solve(&assumptions).is_sat() {
                sat_patterns.push(bits);
            }
        }
        assert_eq!(
            sat_patterns,
            vec![FpBits::negative_infinity(s).bits().to_vec()]
        );
    }

    #[test]
    fn nan_circuit_admits_exactly_the_nan_patterns() {
        let s = FpSort::new(3, 5).unwrap();
        let mut enc = Encoder::new();
        enc.declare("c", Sort::Fp(s)).unwrap();
        let f = Term::new(TermKind::FpIsNan(Term::fp_var("c", s))).unwrap();
        enc.assert_term(&f).unwrap();
        let mut count = 0;
        for p in 0u64..256 {
            let bits = index_bits(p, 8);
            let assumptions: Vec<_> = (0..8)
                .map(|i| enc.map().bit_lit("c", i, bits[i]).unwrap())
                .collect();
            let sat = enc.solve(&assumptions).is_sat();
            let pattern = FpBits::from_bits(s, bits).unwrap();
            assert_eq!(sat, pattern.is_nan());
            count += sat as u32;
        }
        assert_eq!(count, 30);
    }

    /// All FP predicate circuits agree with the exact semantics on every
    /// pattern pair of a tiny sort and on classification of every (3,5)
    /// pattern.
    #[test]
    fn fp_predicate_circuits_agree_with_exact_semantics() {
        use TermKind::*;
        let s = FpSort::new(2, 3).unwrap();
        let a = Term::fp_var("a", s);
        let b = Term::fp_var("b", s);
        let preds: Vec<Term> = vec![
            Term::new(FpLeq(a.clone(), b.clone())).unwrap(),
            Term::new(FpLt(a.clone(), b.clone())).unwrap(),
            Term::new(FpGeq(a.clone(), b.clone())).unwrap(),
            Term::new(FpGt(a.clone(), b.clone())).unwrap(),
            Term::new(FpEq(a.clone(), b.clone())).unwrap(),
            Term::new(Eq(a.clone(), b.clone())).unwrap(),
            Term::new(Eq(
                Term::new(FpMin(a.clone(), b.clone())).unwrap(),
                Term::new(FpNeg(Term::new(FpMax(
                    Term::new(FpNeg(a.clone())).unwrap(),
                    Term::new(FpNeg(b.clone())).unwrap(),
                ))
                .unwrap()))
                .unwrap(),
            ))
            .unwrap(),
        ];
        let n = s.total_bits();
        for f in preds {
            let mut enc = Encoder::new();
            enc.declare("a", Sort::Fp(s)).unwrap();
            enc.declare("b", Sort::Fp(s)).unwrap();
            check_against_evaluator(&mut enc, &f, &[("a", n), ("b", n)]);
        }
    }

    #[test]
    fn fp_classification_circuits_cover_all_3_5_patterns() {
        use TermKind::*;
        let s = FpSort::new(3, 5).unwrap();
        let c = Term::fp_var("c", s);
        let classifiers: Vec<Term> = vec![
            Term::new(FpIsNan(c.clone())).unwrap(),
            Term::new(FpIsInf(c.clone())).unwrap(),
            Term::new(FpIsZero(c.clone())).unwrap(),
            Term::new(FpIsNormal(c.clone())).unwrap(),
            Term::new(FpIsSubnormal(c.clone())).unwrap(),
            Term::new(FpIsNegative(c.clone())).unwrap(),
            Term::new(FpIsPositive(c.clone())).unwrap(),
        ];
        let mut enc = Encoder::new();
        enc.declare("c", Sort::Fp(s)).unwrap();
        let reified: Vec<Lit> = classifiers
            .iter()
            .map(|f| enc.reify(f).unwrap())
            .collect();
        for p in 0u64..256 {
            let bits = index_bits(p, 8);
            let assumptions: Vec<_> = (0..8)
                .map(|i| enc.map().bit_lit("c", i, bits[i]).unwrap())
                .collect();
            let model = match enc.solve(&assumptions) {
                SatResult::Sat(m) => m,
                SatResult::Unsat => panic!("free variable pinning cannot be unsat"),
            };
            let mut assignment = Assignment::default();
            assignment.bind_word("c", bits.clone());
            for (f, &l) in classifiers.iter().zip(&reified) {
                assert_eq!(
                    model.lit_is_true(l),
                    eval_bool(f, &assignment).unwrap(),
                    "{f} on {bits:?}"
                );
            }
        }
    }

    #[test]
    fn nan_never_satisfies_strict_fp_comparisons() {
        let s = FpSort::new(3, 5).unwrap();
        let mut enc = Encoder::new();
        enc.declare("a", Sort::Fp(s)).unwrap();
        enc.declare("b", Sort::Fp(s)).unwrap();
        let f = Term::new(TermKind::FpLt(Term::fp_var("a", s), Term::fp_var("b", s))).unwrap();
        enc.assert_term(&f).unwrap();
        // pin a to the canonical NaN: no model exists
        let nan = fp::canonical_nan(s);
        let assumptions: Vec<_> = (0..8)
            .map(|i| enc.map().bit_lit("a", i, nan.bit(i)).unwrap())
            .collect();
        assert!(!enc.solve(&assumptions).is_sat());
    }

    #[test]
    fn contradictory_bit_assumptions_are_unsat() {
        let s = BvSort::new(4).unwrap();
        let mut enc = Encoder::new();
        enc.declare("x", Sort::BitVec(s)).unwrap();
        let l0 = enc.map().bit_lit("x", 0, true).unwrap();
        let l1 = enc.map().bit_lit("x", 0, false).unwrap();
        assert!(!enc.solve(&[l0, l1]).is_sat());
        assert!(enc.map().bit_lit("x", 4, true).is_err());
        assert!(enc.map().bit_lit("y", 0, true).is_err());
    }

    #[test]
    fn redeclaration_is_rejected() {
        let mut enc = Encoder::new();
        enc.declare("x", Sort::Bool).unwrap();
        assert!(matches!(
            enc.declare("x", Sort::Bool),
            Err(BlastError::Redeclared(_))
        ));
    }
}
