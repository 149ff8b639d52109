//! The optimization engines: attractor-guided bit-level search for BV
//! and FP objectives, and linear/binary improving-cut search on top of
//! the same bit-blasted core.
//!
//! All engines share the NaN protocol for FP objectives: first decide
//! plain satisfiability, then decide whether any non-NaN model exists;
//! only if so does the search run, on the formula permanently
//! strengthened with "the objective is not NaN".

use crate::bitvec::{self, BvConst, Direction, Signedness};
use crate::blast::{BlastError, Encoder, KeyTransform, Term, TermKind};
pub use crate::problem::{
    objective_value, values_agree, Instance, Objective, ObjectiveKind, ObjectiveValue,
};
use crate::fp::{
    self, update_dynamic_attractor, BitOutcome, FpBits, FpError, PrefixAssignment,
    Trajectory, TrajectoryStep,
};
use crate::sat::{Lit, Model, SatResult, Var};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{BigUint, One, Zero};
use std::collections::HashMap;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Blast(#[from] BlastError),
    #[error(transparent)]
    Fp(#[from] FpError),
    #[error("engine `{engine}` cannot optimize a {objective} objective")]
    ObjectiveMismatch {
        engine: &'static str,
        objective: &'static str,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    OfpBs,
    ObvBs,
    OmtLinear,
    OmtBinary,
}

impl EngineKind {
    pub fn name(&self) -> &'static str {
        match self {
            EngineKind::OfpBs => "ofp-bs",
            EngineKind::ObvBs => "obv-bs",
            EngineKind::OmtLinear => "omt-lin",
            EngineKind::OmtBinary => "omt-bin",
        }
    }

    pub fn parse(s: &str) -> Option<EngineKind> {
        match s {
            "ofp-bs" => Some(EngineKind::OfpBs),
            "obv-bs" => Some(EngineKind::ObvBs),
            "omt-lin" => Some(EngineKind::OmtLinear),
            "omt-bin" => Some(EngineKind::OmtBinary),
            _ => None,
        }
    }
}

/// Engine selection plus the search enhancements: branching preference
/// (`bp`), polarity initialization (`pi`), and the safe-bits restriction
/// (`so`) that limits both to objective bits whose improving direction
/// can no longer flip.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub engine: EngineKind,
    pub bp: bool,
    pub pi: bool,
    pub so: bool,
    pub rho: BigRational,
    pub timeout: Option<Duration>,
}

impl EngineConfig {
    pub fn new(engine: EngineKind) -> Self {
        EngineConfig {
            engine,
            bp: false,
            pi: false,
            so: false,
            rho: BigRational::new(BigInt::one(), BigInt::from(2)),
            timeout: None,
        }
    }

    /// Interface-level validation: `so` is only meaningful when it has
    /// something to restrict, and the pivot factor must bisect.
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.so && !(self.bp || self.pi) {
            return Err(EngineError::Config(
                "--so requires --bp or --pi".to_string(),
            ));
        }
        if self.rho <= BigRational::zero() || self.rho >= BigRational::one() {
            return Err(EngineError::Config("rho must lie in (0, 1)".to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptStatus {
    Unsat,
    /// Satisfiable, but every model makes the objective a NaN; the
    /// reported pattern is the model's own NaN encoding.
    NanOnly,
    Optimum,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelValue {
    Bool(bool),
    Word(Vec<bool>),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunStats {
    pub smt_calls: u64,
    pub wall: Duration,
}

#[derive(Debug, Clone)]
pub struct OptResult {
    pub status: OptStatus,
    pub optimum_bits: Option<Vec<bool>>,
    pub optimum: Option<ObjectiveValue>,
    pub model: Option<HashMap<String, ModelValue>>,
    pub stats: RunStats,
    /// Set when a timeout stopped the search; the reported optimum is
    /// only the best bound found so far.
    pub partial: bool,
    pub trajectory: Option<Trajectory>,
}

impl OptResult {
    fn unsat(stats: RunStats) -> OptResult {
        OptResult {
            status: OptStatus::Unsat,
            optimum_bits: None,
            optimum: None,
            model: None,
            stats,
            partial: false,
            trajectory: None,
        }
    }
}

/// Runs the configured engine on the instance.
pub fn solve_instance(inst: &Instance, cfg: &EngineConfig) -> Result<OptResult, EngineError> {
    match (cfg.engine, &inst.objective.kind) {
        (EngineKind::OfpBs, ObjectiveKind::Fp(_)) => ofp_bs(inst, cfg),
        (EngineKind::OfpBs, _) => Err(EngineError::ObjectiveMismatch {
            engine: "ofp-bs",
            objective: "bit-vector",
        }),
        (EngineKind::ObvBs, ObjectiveKind::BitVec { .. }) => obv_bs(inst, cfg),
        (EngineKind::ObvBs, _) => Err(EngineError::ObjectiveMismatch {
            engine: "obv-bs",
            objective: "floating-point",
        }),
        (EngineKind::OmtLinear, _) => omt_linear(inst, cfg),
        (EngineKind::OmtBinary, _) => omt_binary(inst, cfg),
    }
}

// ---------------------------------------------------------------------------
// shared machinery

struct Run {
    enc: Encoder,
    objective: Objective,
    start: Instant,
    deadline: Option<Instant>,
}

impl Run {
    fn build(inst: &Instance, cfg: &EngineConfig) -> Result<Run, EngineError> {
        let mut enc = Encoder::new();
        for (name, sort) in &inst.declarations {
            enc.declare(name, *sort)?;
        }
        for a in &inst.assertions {
            enc.assert_term(a)?;
        }
        let start = Instant::now();
        Ok(Run {
            enc,
            objective: inst.objective.clone(),
            start,
            deadline: cfg.timeout.map(|t| start + t),
        })
    }

    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn cost_term(&self) -> Term {
        match &self.objective.kind {
            ObjectiveKind::BitVec { sort, .. } => Term::bv_var(&self.objective.name, *sort),
            ObjectiveKind::Fp(s) => Term::fp_var(&self.objective.name, *s),
        }
    }

    fn cost_pattern(&self, model: &Model) -> Vec<bool> {
        self.enc
            .map()
            .pattern(&self.objective.name, model)
            .expect("objective is declared")
    }

    fn bit_lit(&self, index: usize, value: bool) -> Lit {
        self.enc
            .map()
            .bit_lit(&self.objective.name, index, value)
            .expect("objective bit in range")
    }

    fn stats(&self) -> RunStats {
        RunStats {
            smt_calls: self.enc.solve_calls(),
            wall: self.start.elapsed(),
        }
    }

    fn snapshot(&self, model: &Model) -> HashMap<String, ModelValue> {
        let mut out = HashMap::new();
        for (name, _) in self.enc.map().word_names() {
            let pattern = self.enc.map().pattern(&name, model).unwrap();
            out.insert(name, ModelValue::Word(pattern));
        }
        for (name, v) in self.enc.map().bool_names() {
            out.insert(name, ModelValue::Bool(model.value(v)));
        }
        out
    }

    fn objective_value(&self, pattern: &[bool]) -> ObjectiveValue {
        objective_value(&self.objective.kind, pattern)
    }

    fn result_from_model(
        &self,
        model: &Model,
        status: OptStatus,
        partial: bool,
        trajectory: Option<Trajectory>,
    ) -> OptResult {
        let pattern = self.cost_pattern(model);
        OptResult {
            status,
            optimum: Some(self.objective_value(&pattern)),
            optimum_bits: Some(pattern),
            model: Some(self.snapshot(model)),
            stats: self.stats(),
            partial,
            trajectory,
        }
    }
}

/// Outcome of the two initial satisfiability checks of the NaN protocol.
enum Precheck {
    Unsat,
    NanOnly { model: Model, pattern: Vec<bool> },
    Ready { model: Model },
}

/// Runs the two NaN pre-checks for an FP objective: (i) is the formula
/// satisfiable at all, (ii) does it have a model where the objective is
/// not NaN. On the `Ready` path the formula is permanently strengthened
/// with "not NaN", which every later search step relies on.
fn nan_prechecks(run: &mut Run) -> Result<Precheck, EngineError> {
    let first = match run.enc.solve(&[]) {
        SatResult::Unsat => return Ok(Precheck::Unsat),
        SatResult::Sat(m) => m,
    };
    let sort = match run.objective.kind {
        ObjectiveKind::Fp(s) => s,
        _ => return Ok(Precheck::Ready { model: first }),
    };
    let pattern = run.cost_pattern(&first);
    let not_nan = Term::negate(
        Term::new(TermKind::FpIsNan(Term::fp_var(&run.objective.name, sort))).unwrap(),
    );
    if FpBits::from_bits(sort, pattern.clone()).unwrap().is_nan() {
        run.enc.assert_term(&not_nan)?;
        match run.enc.solve(&[]) {
            SatResult::Unsat => Ok(Precheck::NanOnly {
                model: first,
                pattern,
            }),
            SatResult::Sat(m) => Ok(Precheck::Ready { model: m }),
        }
    } else {
        // A non-NaN model exists, so the restriction is satisfiable; the
        // bit-level search needs it asserted to keep NaN patterns out of
        // the assumption queries.
        run.enc.assert_term(&not_nan)?;
        Ok(Precheck::Ready { model: first })
    }
}

fn nan_only_result(run: &Run, model: &Model, pattern: Vec<bool>) -> OptResult {
    OptResult {
        status: OptStatus::NanOnly,
        optimum: Some(run.objective_value(&pattern)),
        optimum_bits: Some(pattern),
        model: Some(run.snapshot(model)),
        stats: run.stats(),
        partial: false,
        trajectory: None,
    }
}

// ---------------------------------------------------------------------------
// enhancements

fn safe_bit_mask(kind: &ObjectiveKind, prefix: &[bool]) -> Vec<bool> {
    let n = kind.width();
    match kind {
        ObjectiveKind::BitVec { .. } => vec![true; n],
        ObjectiveKind::Fp(s) => {
            let ebits = s.ebits() as usize;
            let sign_known = !prefix.is_empty();
            let decided_exp_zero = prefix
                .iter()
                .enumerate()
                .any(|(i, &b)| i >= 1 && i <= ebits && !b);
            (0..n)
                .map(|i| {
                    if i == 0 {
                        true
                    } else if i <= ebits {
                        sign_known
                    } else {
                        sign_known && (!prefix[0] || decided_exp_zero)
                    }
                })
                .collect()
        }
    }
}

/// Issues the branching-preference and polarity hints for the objective
/// bits, optionally restricted to the safe set.
fn apply_enhancements(
    run: &mut Run,
    cfg: &EngineConfig,
    attractor_bits: &[bool],
    prefix: &[bool],
) {
    if !cfg.bp && !cfg.pi {
        return;
    }
    let mask = if cfg.so {
        safe_bit_mask(&run.objective.kind, prefix)
    } else {
        vec![true; attractor_bits.len()]
    };
    let vars: Vec<Var> = run
        .enc
        .map()
        .word_bits(&run.objective.name)
        .expect("objective declared")
        .to_vec();
    if cfg.bp {
        let listed: Vec<Var> = (0..vars.len()).filter(|&i| mask[i]).map(|i| vars[i]).collect();
        run.enc.solver().set_branch_priority(&listed);
    }
    if cfg.pi {
        for i in 0..vars.len() {
            if mask[i] {
                run.enc.solver().set_polarity_hint(vars[i], attractor_bits[i]);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// bit-level engines

/// Floating-point optimization by lexicographic bit search guided by the
/// dynamic attractor. At most n+2 solver calls: the two pre-checks plus
/// one per objective bit, minus every bit the current model already
/// settles.
pub fn ofp_bs(inst: &Instance, cfg: &EngineConfig) -> Result<OptResult, EngineError> {
    let sort = match inst.objective.kind {
        ObjectiveKind::Fp(s) => s,
        _ => {
            return Err(EngineError::ObjectiveMismatch {
                engine: "ofp-bs",
                objective: "bit-vector",
            })
        }
    };
    let dir = inst.objective.direction;
    let n = sort.total_bits();
    let mut run = Run::build(inst, cfg)?;
    let mut model = match nan_prechecks(&mut run)? {
        Precheck::Unsat => return Ok(OptResult::unsat(run.stats())),
        Precheck::NanOnly { model, pattern } => {
            return Ok(nan_only_result(&run, &model, pattern))
        }
        Precheck::Ready { model } => model,
    };

    let mut prefix = PrefixAssignment::empty(sort);
    let mut attractor = fp::initial_dynamic_attractor(sort, dir);
    let mut assumptions: Vec<Lit> = Vec::with_capacity(n);
    let mut trajectory = Trajectory::new();
    apply_enhancements(&mut run, cfg, attractor.pattern().bits(), prefix.bits());

    for i in 0..n {
        if run.out_of_time() {
            return Ok(run.result_from_model(&model, OptStatus::Optimum, true, Some(trajectory)));
        }
        let target = attractor.bit(i);
        let model_bit = run.cost_pattern(&model)[i];
        if model_bit == target {
            // the model already witnesses this attractor equality
            prefix.push(target);
            assumptions.push(run.bit_lit(i, target));
            trajectory.record(TrajectoryStep {
                bit: i,
                attractor: attractor.pattern().bits().to_vec(),
                target,
                outcome: BitOutcome::Sat,
            });
            continue;
        }
        apply_enhancements(&mut run, cfg, attractor.pattern().bits(), prefix.bits());
        let mut query = assumptions.clone();
        query.push(run.bit_lit(i, target));
        match run.enc.solve(&query) {
            SatResult::Sat(m) => {
                model = m;
                prefix.push(target);
                assumptions.push(run.bit_lit(i, target));
                trajectory.record(TrajectoryStep {
                    bit: i,
                    attractor: attractor.pattern().bits().to_vec(),
                    target,
                    outcome: BitOutcome::Sat,
                });
            }
            SatResult::Unsat => {
                trajectory.record(TrajectoryStep {
                    bit: i,
                    attractor: attractor.pattern().bits().to_vec(),
                    target,
                    outcome: BitOutcome::Unsat,
                });
                prefix.push(!target);
                assumptions.push(run.bit_lit(i, !target));
                attractor = update_dynamic_attractor(&prefix, dir)?;
            }
        }
    }
    let calls = run.enc.solve_calls();
    assert!(
        calls <= (n as u64) + 2,
        "bit search exceeded the n+2 call bound: {calls} > {}",
        n + 2
    );
    Ok(run.result_from_model(&model, OptStatus::Optimum, false, Some(trajectory)))
}

/// Bit-vector optimization by lexicographic bit search toward the static
/// attractor of the sort and signedness.
pub fn obv_bs(inst: &Instance, cfg: &EngineConfig) -> Result<OptResult, EngineError> {
    let (sort, signedness) = match inst.objective.kind {
        ObjectiveKind::BitVec { sort, signedness } => (sort, signedness),
        _ => {
            return Err(EngineError::ObjectiveMismatch {
                engine: "obv-bs",
                objective: "floating-point",
            })
        }
    };
    let dir = inst.objective.direction;
    let n = sort.width();
    let min_attractor = bitvec::attractor(sort, signedness, Direction::Minimize);
    let targets = bitvec::objective_bit_targets(n, &min_attractor, dir)
        .expect("attractor width matches objective");

    let mut run = Run::build(inst, cfg)?;
    let mut model = match run.enc.solve(&[]) {
        SatResult::Unsat => return Ok(OptResult::unsat(run.stats())),
        SatResult::Sat(m) => m,
    };
    let mut assumptions: Vec<Lit> = Vec::with_capacity(n);
    let mut trajectory = Trajectory::new();
    let mut prefix: Vec<bool> = Vec::with_capacity(n);
    apply_enhancements(&mut run, cfg, &targets, &prefix);

    for (i, &target) in targets.iter().enumerate() {
        if run.out_of_time() {
            return Ok(run.result_from_model(&model, OptStatus::Optimum, true, Some(trajectory)));
        }
        let model_bit = run.cost_pattern(&model)[i];
        if model_bit == target {
            prefix.push(target);
            assumptions.push(run.bit_lit(i, target));
            trajectory.record(TrajectoryStep {
                bit: i,
                attractor: targets.clone(),
                target,
                outcome: BitOutcome::Sat,
            });
            continue;
        }
        apply_enhancements(&mut run, cfg, &targets, &prefix);
        let mut query = assumptions.clone();
        query.push(run.bit_lit(i, target));
        match run.enc.solve(&query) {
            SatResult::Sat(m) => {
                model = m;
                prefix.push(target);
                assumptions.push(run.bit_lit(i, target));
                trajectory.record(TrajectoryStep {
                    bit: i,
                    attractor: targets.clone(),
                    target,
                    outcome: BitOutcome::Sat,
                });
            }
            SatResult::Unsat => {
                prefix.push(!target);
                assumptions.push(run.bit_lit(i, !target));
                trajectory.record(TrajectoryStep {
                    bit: i,
                    attractor: targets.clone(),
                    target,
                    outcome: BitOutcome::Unsat,
                });
            }
        }
    }
    let calls = run.enc.solve_calls();
    assert!(
        calls <= (n as u64) + 1,
        "bit search exceeded the n+1 call bound: {calls} > {}",
        n + 1
    );
    Ok(run.result_from_model(&model, OptStatus::Optimum, false, Some(trajectory)))
}

// ---------------------------------------------------------------------------
// OMT-schema engines

fn static_attractor_bits(objective: &Objective) -> Vec<bool> {
    match &objective.kind {
        ObjectiveKind::BitVec { sort, signedness } => {
            bitvec::attractor(*sort, *signedness, objective.direction)
                .bits()
                .to_vec()
        }
        ObjectiveKind::Fp(s) => match objective.direction {
            Direction::Minimize => FpBits::negative_infinity(*s).bits().to_vec(),
            Direction::Maximize => FpBits::positive_infinity(*s).bits().to_vec(),
        },
    }
}

/// The strict improving cut `cost < v` (or `> v` when maximizing), by the
/// semantic order of the objective's sort.
fn improving_cut(objective: &Objective, cost: &Term, pattern: &[bool]) -> Term {
    let minimize = objective.direction == Direction::Minimize;
    match &objective.kind {
        ObjectiveKind::BitVec { signedness, .. } => {
            let lit = Term::bv_lit(BvConst::from_bits(pattern.to_vec()).unwrap());
            let kind = match (signedness, minimize) {
                (Signedness::Unsigned, true) => TermKind::BvUlt(cost.clone(), lit),
                (Signedness::Unsigned, false) => TermKind::BvUgt(cost.clone(), lit),
                (Signedness::Signed, true) => TermKind::BvSlt(cost.clone(), lit),
                (Signedness::Signed, false) => TermKind::BvSgt(cost.clone(), lit),
            };
            Term::new(kind).unwrap()
        }
        ObjectiveKind::Fp(s) => {
            let lit = Term::fp_lit(FpBits::from_bits(*s, pattern.to_vec()).unwrap());
            let kind = if minimize {
                TermKind::FpLt(cost.clone(), lit)
            } else {
                TermKind::FpGt(cost.clone(), lit)
            };
            Term::new(kind).unwrap()
        }
    }
}

/// Linear search: repeatedly assert a strict improving cut against the
/// latest model value until unsatisfiable. Cuts are permanent clauses.
pub fn omt_linear(inst: &Instance, cfg: &EngineConfig) -> Result<OptResult, EngineError> {
    let mut run = Run::build(inst, cfg)?;
    let mut model = match nan_prechecks(&mut run)? {
        Precheck::Unsat => return Ok(OptResult::unsat(run.stats())),
        Precheck::NanOnly { model, pattern } => {
            return Ok(nan_only_result(&run, &model, pattern))
        }
        Precheck::Ready { model } => model,
    };
    let attractor = static_attractor_bits(&inst.objective);
    apply_enhancements(&mut run, cfg, &attractor, &[]);
    let cost = run.cost_term();
    loop {
        if run.out_of_time() {
            return Ok(run.result_from_model(&model, OptStatus::Optimum, true, None));
        }
        let current = run.cost_pattern(&model);
        let cut = improving_cut(&inst.objective, &cost, &current);
        run.enc.assert_term(&cut)?;
        match run.enc.solve(&[]) {
            SatResult::Sat(m) => model = m,
            SatResult::Unsat => break,
        }
    }
    Ok(run.result_from_model(&model, OptStatus::Optimum, false, None))
}

/// Rank space of the non-NaN patterns of the objective's sort. Rank 0 is
/// the extremum in the optimization direction, so binary search shrinks
/// the candidate interval toward rank 0.
struct RankSpace {
    kind: ObjectiveKind,
    direction: Direction,
    width: usize,
    /// key of the order-minimum pattern
    min_key: BigUint,
    /// key of the order-maximum pattern
    max_key: BigUint,
}

impl RankSpace {
    fn new(objective: &Objective) -> RankSpace {
        let width = objective.kind.width();
        let (min_pattern, max_pattern) = match &objective.kind {
            ObjectiveKind::BitVec { sort, signedness } => (
                bitvec::attractor(*sort, *signedness, Direction::Minimize)
                    .bits()
                    .to_vec(),
                bitvec::attractor(*sort, *signedness, Direction::Maximize)
                    .bits()
                    .to_vec(),
            ),
            ObjectiveKind::Fp(s) => (
                FpBits::negative_infinity(*s).bits().to_vec(),
                FpBits::positive_infinity(*s).bits().to_vec(),
            ),
        };
        let mut space = RankSpace {
            kind: objective.kind.clone(),
            direction: objective.direction,
            width,
            min_key: BigUint::zero(),
            max_key: BigUint::zero(),
        };
        space.min_key = space.key_of(&min_pattern);
        space.max_key = space.key_of(&max_pattern);
        space
    }

    /// Monotone unsigned key: ascending keys follow the sort's order on
    /// non-NaN patterns (-0 just below +0 for FP).
    fn key_of(&self, pattern: &[bool]) -> BigUint {
        let bits: Vec<bool> = match self.kind {
            ObjectiveKind::BitVec {
                signedness: Signedness::Unsigned,
                ..
            } => pattern.to_vec(),
            ObjectiveKind::BitVec {
                signedness: Signedness::Signed,
                ..
            } => {
                let mut b = pattern.to_vec();
                b[0] = !b[0];
                b
            }
            ObjectiveKind::Fp(_) => {
                let sign = pattern[0];
                let mut b = vec![!sign];
                b.extend(pattern[1..].iter().map(|&x| x != sign));
                b
            }
        };
        let mut v = BigUint::zero();
        for b in bits {
            v <<= 1u8;
            if b {
                v |= BigUint::one();
            }
        }
        v
    }

    fn pattern_of_key(&self, key: &BigUint) -> Vec<bool> {
        let raw: Vec<bool> = (0..self.width)
            .map(|i| key.bit((self.width - 1 - i) as u64))
            .collect();
        match self.kind {
            ObjectiveKind::BitVec {
                signedness: Signedness::Unsigned,
                ..
            } => raw,
            ObjectiveKind::BitVec {
                signedness: Signedness::Signed,
                ..
            } => {
                let mut b = raw;
                b[0] = !b[0];
                b
            }
            ObjectiveKind::Fp(_) => {
                let sign = !raw[0];
                let mut b = vec![sign];
                b.extend(raw[1..].iter().map(|&x| x != sign));
                b
            }
        }
    }

    /// Rank 0 is the best value in the optimization direction.
    fn rank_of(&self, pattern: &[bool]) -> BigUint {
        let key = self.key_of(pattern);
        match self.direction {
            Direction::Minimize => key - &self.min_key,
            Direction::Maximize => self.max_key.clone() - key,
        }
    }

    fn pattern_at_rank(&self, rank: &BigUint) -> Vec<bool> {
        let key = match self.direction {
            Direction::Minimize => &self.min_key + rank,
            Direction::Maximize => &self.max_key - rank,
        };
        self.pattern_of_key(&key)
    }

    /// Key-space boundary bits for "strictly better than this rank".
    fn key_bits_at_rank(&self, rank: &BigUint) -> Vec<bool> {
        let key = self.key_of(&self.pattern_at_rank(rank));
        (0..self.width)
            .map(|i| key.bit((self.width - 1 - i) as u64))
            .collect()
    }

    fn transform(&self) -> KeyTransform {
        match self.kind {
            ObjectiveKind::BitVec {
                signedness: Signedness::Unsigned,
                ..
            } => KeyTransform::Identity,
            ObjectiveKind::BitVec {
                signedness: Signedness::Signed,
                ..
            } => KeyTransform::FlipSign,
            ObjectiveKind::Fp(_) => KeyTransform::FpOrder,
        }
    }
}

fn floor_mix(rho: &BigRational, ub: &BigUint, lb: &BigUint) -> BigUint {
    let ub = BigRational::from_integer(BigInt::from(ub.clone()));
    let lb = BigRational::from_integer(BigInt::from(lb.clone()));
    let mix = rho * ub + (BigRational::one() - rho) * lb;
    mix.floor()
        .to_integer()
        .to_biguint()
        .expect("ranks are non-negative")
}

/// Binary search over the rank space of the objective's sort. The pivot
/// is the representable value at the rho-weighted rank between the
/// current bounds; cuts are reified rank comparisons assumed per query
/// and committed as permanent bounds once decided.
pub fn omt_binary(inst: &Instance, cfg: &EngineConfig) -> Result<OptResult, EngineError> {
    let mut run = Run::build(inst, cfg)?;
    let mut model = match nan_prechecks(&mut run)? {
        Precheck::Unsat => return Ok(OptResult::unsat(run.stats())),
        Precheck::NanOnly { model, pattern } => {
            return Ok(nan_only_result(&run, &model, pattern))
        }
        Precheck::Ready { model } => model,
    };
    let attractor = static_attractor_bits(&inst.objective);
    apply_enhancements(&mut run, cfg, &attractor, &[]);
    let space = RankSpace::new(&inst.objective);
    let greater = inst.objective.direction == Direction::Maximize;
    let mut lo = BigUint::zero();
    let mut ub = space.rank_of(&run.cost_pattern(&model));
    while lo < ub {
        if run.out_of_time() {
            return Ok(run.result_from_model(&model, OptStatus::Optimum, true, None));
        }
        let pivot = floor_mix(&cfg.rho, &ub, &lo);
        // out-of-range pivot degenerates to the plain improving cut
        let cut_rank = if lo < pivot && pivot <= ub {
            pivot
        } else {
            ub.clone()
        };
        let boundary = space.key_bits_at_rank(&cut_rank);
        let cut_lit = run.enc.reify_key_compare(
            &inst.objective.name,
            space.transform(),
            &boundary,
            greater,
        )?;
        match run.enc.solve(&[cut_lit]) {
            SatResult::Sat(m) => {
                ub = space.rank_of(&run.cost_pattern(&m));
                model = m;
                run.enc.solver().add_clause(&[cut_lit]);
            }
            SatResult::Unsat => {
                lo = cut_rank;
                run.enc.solver().add_clause(&[!cut_lit]);
            }
        }
    }
    Ok(run.result_from_model(&model, OptStatus::Optimum, false, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitvec::BvSort;
    use crate::blast::Sort;
    use crate::fp::{FpClass, FpSort};

    fn fp35() -> FpSort {
        FpSort::new(3, 5).unwrap()
    }

    fn fp_pattern(sort: FpSort, sign: &str, exp: &str, sig: &str) -> Vec<bool> {
        FpBits::from_fields(sort, sign, exp, sig)
            .unwrap()
            .bits()
            .to_vec()
    }

    fn fp_instance(sort: FpSort, dir: Direction, assertions: Vec<Term>) -> Instance {
        Instance {
            declarations: vec![("cost".to_string(), Sort::Fp(sort))],
            assertions,
            objective: Objective {
                name: "cost".to_string(),
                direction: dir,
                kind: ObjectiveKind::Fp(sort),
            },
        }
    }

    fn bv_instance(
        width: usize,
        signedness: Signedness,
        dir: Direction,
        assertions: Vec<Term>,
    ) -> Instance {
        let sort = BvSort::new(width).unwrap();
        Instance {
            declarations: vec![("cost".to_string(), Sort::BitVec(sort))],
            assertions,
            objective: Objective {
                name: "cost".to_string(),
                direction: dir,
                kind: ObjectiveKind::BitVec { sort, signedness },
            },
        }
    }

    fn geq_29_over_2(sort: FpSort) -> Term {
        Term::new(TermKind::FpGeq(
            Term::fp_var("cost", sort),
            Term::fp_lit(FpBits::from_fields(sort, "0", "110", "1101").unwrap()),
        ))
        .unwrap()
    }

    /// The worked minimization under `cost >= 29/2` on (3,5): the
    /// attractor walks -oo, +0, +2, +8, +8, +12, +14, +14 with outcomes
    /// U,U,U,S,U,U,S,U and lands exactly on 29/2.
    #[test]
    fn bit_search_replays_the_worked_trajectory() {
        let s = fp35();
        let inst = fp_instance(s, Direction::Minimize, vec![geq_29_over_2(s)]);
        let cfg = EngineConfig::new(EngineKind::OfpBs);
        let res = ofp_bs(&inst, &cfg).unwrap();
        assert_eq!(res.status, OptStatus::Optimum);
        assert_eq!(
            res.optimum_bits.as_deref().unwrap(),
            fp_pattern(s, "0", "110", "1101")
        );
        assert_eq!(res.optimum.unwrap().to_string(), "29/2");
        let steps = res.trajectory.as_ref().unwrap().steps().to_vec();
        let attractors: Vec<Vec<bool>> = steps.iter().map(|t| t.attractor.clone()).collect();
        assert_eq!(
            attractors,
            vec![
                fp_pattern(s, "1", "111", "0000"), // -oo
                fp_pattern(s, "0", "000", "0000"), // +0
                fp_pattern(s, "0", "100", "0000"), // +2
                fp_pattern(s, "0", "110", "0000"), // +8
                fp_pattern(s, "0", "110", "0000"), // +8
                fp_pattern(s, "0", "110", "1000"), // +12
                fp_pattern(s, "0", "110", "1100"), // +14
                fp_pattern(s, "0", "110", "1100"), // +14
            ]
        );
        let outcomes: Vec<BitOutcome> = steps.iter().map(|t| t.outcome).collect();
        use BitOutcome::{Sat, Unsat};
        assert_eq!(
            outcomes,
            vec![Unsat, Unsat, Unsat, Sat, Unsat, Unsat, Sat, Unsat]
        );
        assert!(res.stats.smt_calls <= 10);
    }

    #[test]
    fn unconstrained_minimum_is_negative_infinity() {
        let s = fp35();
        let inst = fp_instance(s, Direction::Minimize, vec![]);
        let res = ofp_bs(&inst, &EngineConfig::new(EngineKind::OfpBs)).unwrap();
        assert_eq!(
            res.optimum_bits.as_deref().unwrap(),
            FpBits::negative_infinity(s).bits()
        );
        assert!(res.stats.smt_calls <= s.total_bits() as u64 + 2);
        let max = ofp_bs(
            &fp_instance(s, Direction::Maximize, vec![]),
            &EngineConfig::new(EngineKind::OfpBs),
        )
        .unwrap();
        assert_eq!(
            max.optimum_bits.as_deref().unwrap(),
            FpBits::positive_infinity(s).bits()
        );
    }

    #[test]
    fn prechecks_detect_unsat_and_nan_only() {
        let s = fp35();
        let unsat = fp_instance(s, Direction::Minimize, vec![Term::truth(false)]);
        let res = ofp_bs(&unsat, &EngineConfig::new(EngineKind::OfpBs)).unwrap();
        assert_eq!(res.status, OptStatus::Unsat);
        assert_eq!(res.stats.smt_calls, 1);

        let nan_only = fp_instance(
            s,
            Direction::Minimize,
            vec![Term::new(TermKind::FpIsNan(Term::fp_var("cost", s))).unwrap()],
        );
        for kind in [EngineKind::OfpBs, EngineKind::OmtLinear, EngineKind::OmtBinary] {
            let mut cfg = EngineConfig::new(kind);
            cfg.engine = kind;
            let res = solve_instance(&nan_only, &cfg).unwrap();
            assert_eq!(res.status, OptStatus::NanOnly, "{}", kind.name());
            let bits = res.optimum_bits.unwrap();
            assert_eq!(
                FpBits::from_bits(s, bits).unwrap().classify(),
                FpClass::Nan
            );
            assert_eq!(res.optimum.unwrap().to_string(), "NaN");
        }
    }

    #[test]
    fn precheck_keeps_searching_when_non_nan_models_exist() {
        let s = fp35();
        // NaN is allowed but a real value exists; the optimum must be real
        let nan_or_five = Term::or(vec![
            Term::new(TermKind::FpIsNan(Term::fp_var("cost", s))).unwrap(),
            Term::new(TermKind::FpEq(
                Term::fp_var("cost", s),
                Term::fp_lit(FpBits::from_fields(s, "0", "101", "0100").unwrap()), // 5.0
            ))
            .unwrap(),
        ]);
        let inst = fp_instance(s, Direction::Minimize, vec![nan_or_five]);
        for kind in [EngineKind::OfpBs, EngineKind::OmtLinear, EngineKind::OmtBinary] {
            let res = solve_instance(&inst, &EngineConfig::new(kind)).unwrap();
            assert_eq!(res.status, OptStatus::Optimum, "{}", kind.name());
            assert_eq!(res.optimum.unwrap().to_string(), "5", "{}", kind.name());
        }
    }

    #[test]
    fn bv_search_matches_small_known_optima() {
        use TermKind::*;
        // unsigned 4-bit, cost < 10, maximize -> 9
        let s4 = BvSort::new(4).unwrap();
        let inst = bv_instance(
            4,
            Signedness::Unsigned,
            Direction::Maximize,
            vec![Term::new(BvUlt(
                Term::bv_var("cost", s4),
                Term::bv_lit(BvConst::parse("#b1010").unwrap()),
            ))
            .unwrap()],
        );
        let res = obv_bs(&inst, &EngineConfig::new(EngineKind::ObvBs)).unwrap();
        assert_eq!(res.optimum.unwrap().to_string(), "9");

        // signed 3-bit, cost >= -3, minimize -> -3
        let s3 = BvSort::new(3).unwrap();
        let inst = bv_instance(
            3,
            Signedness::Signed,
            Direction::Minimize,
            vec![Term::new(BvSge(
                Term::bv_var("cost", s3),
                Term::bv_lit(BvConst::parse("#b101").unwrap()),
            ))
            .unwrap()],
        );
        let res = obv_bs(&inst, &EngineConfig::new(EngineKind::ObvBs)).unwrap();
        assert_eq!(res.optimum.unwrap().to_string(), "-3");
        assert_eq!(res.optimum_bits.unwrap(), vec![true, false, true]);

        // unconstrained signed 3-bit minimize -> the attractor -4
        let inst = bv_instance(3, Signedness::Signed, Direction::Minimize, vec![]);
        let res = obv_bs(&inst, &EngineConfig::new(EngineKind::ObvBs)).unwrap();
        assert_eq!(res.optimum.unwrap().to_string(), "-4");
    }

    #[test]
    fn linear_search_agrees_on_the_worked_instance() {
        let s = fp35();
        let inst = fp_instance(s, Direction::Minimize, vec![geq_29_over_2(s)]);
        let res = omt_linear(&inst, &EngineConfig::new(EngineKind::OmtLinear)).unwrap();
        assert_eq!(res.optimum.unwrap().to_string(), "29/2");
    }

    #[test]
    fn linear_search_stops_after_one_cut_on_a_singleton() {
        let s = fp35();
        let zero = Term::new(TermKind::FpEq(
            Term::fp_var("cost", s),
            Term::fp_lit(FpBits::positive_zero(s)),
        ))
        .unwrap();
        let inst = fp_instance(s, Direction::Minimize, vec![zero]);
        let res = omt_linear(&inst, &EngineConfig::new(EngineKind::OmtLinear)).unwrap();
        assert_eq!(res.status, OptStatus::Optimum);
        let bits = res.optimum_bits.unwrap();
        let cls = FpBits::from_bits(s, bits).unwrap().classify();
        assert!(matches!(cls, FpClass::PosZero | FpClass::NegZero));
        // initial check plus exactly one refuted improving cut
        assert_eq!(res.stats.smt_calls, 2);
    }

    #[test]
    fn binary_search_agrees_on_the_worked_instance() {
        let s = fp35();
        let inst = fp_instance(s, Direction::Minimize, vec![geq_29_over_2(s)]);
        let res = omt_binary(&inst, &EngineConfig::new(EngineKind::OmtBinary)).unwrap();
        assert_eq!(res.optimum.unwrap().to_string(), "29/2");
    }

    #[test]
    fn rank_space_orders_patterns_like_the_sort() {
        let s = fp35();
        let objective = Objective {
            name: "cost".to_string(),
            direction: Direction::Minimize,
            kind: ObjectiveKind::Fp(s),
        };
        let space = RankSpace::new(&objective);
        assert_eq!(
            space.rank_of(FpBits::negative_infinity(s).bits()),
            BigUint::zero()
        );
        // ranks are adjacent across the -0/+0 boundary
        let neg_zero = space.rank_of(FpBits::negative_zero(s).bits());
        let pos_zero = space.rank_of(FpBits::positive_zero(s).bits());
        assert_eq!(&neg_zero + BigUint::one(), pos_zero);
        // round trip through ranks over every non-NaN pattern
        for p in 0u64..256 {
            let bits: Vec<bool> = (0..8).map(|i| p & (1 << (7 - i)) != 0).collect();
            if FpBits::from_bits(s, bits.clone()).unwrap().is_nan() {
                continue;
            }
            let r = space.rank_of(&bits);
            assert_eq!(space.pattern_at_rank(&r), bits);
        }
        // the midpoint rank between +0 and 31/2 under rho = 1/2
        let lo = space.rank_of(FpBits::positive_zero(s).bits());
        let ub = space.rank_of(FpBits::from_fields(s, "0", "110", "1111").unwrap().bits());
        let rho = BigRational::new(BigInt::one(), BigInt::from(2));
        let pivot = floor_mix(&rho, &ub, &lo);
        let expected = (&lo + &ub) / BigUint::from(2u8);
        assert_eq!(pivot, expected);
    }

    #[test]
    fn engines_agree_on_max_direction_too() {
        let s = fp35();
        // cost <= -1/64 (negative side), maximize -> -1/64
        let bound = Term::new(TermKind::FpLeq(
            Term::fp_var("cost", s),
            Term::fp_lit(FpBits::from_fields(s, "1", "000", "0001").unwrap()),
        ))
        .unwrap();
        let inst = fp_instance(s, Direction::Maximize, vec![bound]);
        let expected = "-1/64";
        for kind in [EngineKind::OfpBs, EngineKind::OmtLinear, EngineKind::OmtBinary] {
            let res = solve_instance(&inst, &EngineConfig::new(kind)).unwrap();
            assert_eq!(res.optimum.unwrap().to_string(), expected, "{}", kind.name());
        }
    }

    #[test]
    fn enhancement_combinations_do_not_change_the_optimum() {
        let s = fp35();
        let inst = fp_instance(s, Direction::Minimize, vec![geq_29_over_2(s)]);
        for kind in [EngineKind::OfpBs, EngineKind::OmtLinear, EngineKind::OmtBinary] {
            for mask in 0u8..8 {
                let mut cfg = EngineConfig::new(kind);
                cfg.bp = mask & 1 != 0;
                cfg.pi = mask & 2 != 0;
                cfg.so = mask & 4 != 0;
                let res = solve_instance(&inst, &cfg).unwrap();
                assert_eq!(
                    res.optimum.unwrap().to_string(),
                    "29/2",
                    "{} mask {mask}",
                    kind.name()
                );
            }
        }
    }

    #[test]
    fn config_validation_flags_bad_inputs() {
        let mut cfg = EngineConfig::new(EngineKind::OfpBs);
        assert!(cfg.validate().is_ok());
        cfg.so = true;
        assert!(cfg.validate().is_err());
        cfg.pi = true;
        assert!(cfg.validate().is_ok());
        cfg.rho = BigRational::one();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn engine_objective_mismatch_is_reported() {
        let s = fp35();
        let inst = fp_instance(s, Direction::Minimize, vec![]);
        assert!(matches!(
            solve_instance(&inst, &EngineConfig::new(EngineKind::ObvBs)),
            Err(EngineError::ObjectiveMismatch { .. })
        ));
        let bv = bv_instance(4, Signedness::Unsigned, Direction::Minimize, vec![]);
        assert!(matches!(
            solve_instance(&bv, &EngineConfig::new(EngineKind::OfpBs)),
            Err(EngineError::ObjectiveMismatch { .. })
        ));
    }

    #[test]
    fn timeout_reports_partial_result() {
        let s = fp35();
        let mut cfg = EngineConfig::new(EngineKind::OfpBs);
        cfg.timeout = Some(Duration::from_secs(0));
        let inst = fp_instance(s, Direction::Minimize, vec![geq_29_over_2(s)]);
        let res = ofp_bs(&inst, &cfg).unwrap();
        assert!(res.partial);
        assert!(res.optimum.is_some());
    }
}
