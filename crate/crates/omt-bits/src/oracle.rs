//! Independent certification harness: a brute-force optimizer that tries
//! every objective pattern by assumption, an optimum verifier, a seeded
//! instance generator, and a benchmark runner emitting CSV rows.
//!
//! The brute-force path never enters the engines module: it drives the
//! bit-blasted SAT core directly and ranks candidates with the exact
//! value semantics, which is what makes its verdicts independent.

use crate::bitvec::{BvConst, BvSort, Direction, Signedness};
use crate::blast::{Encoder, Sort, Term, TermKind};
use crate::engines::{solve_instance, EngineConfig, EngineKind, OptStatus};
use crate::fp::{self, FpBits, FpSort};
use crate::frontend::{parse_script, script_instance, Command, Script};
use crate::problem::{
    objective_value, values_agree, Instance, Objective, ObjectiveKind, ObjectiveValue,
};
use num::rational::BigRational;
use num::BigInt;
use num::One;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::fmt;
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("objective width {0} exceeds the brute-force guardrail of {MAX_BRUTE_FORCE_BITS} bits")]
    TooWide(usize),
    #[error("{0}")]
    Build(String),
}

/// Exhaustive enumeration stays tractable up to this many objective bits.
pub const MAX_BRUTE_FORCE_BITS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStatus {
    Unsat,
    NanOnly,
    Optimum,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub status: OracleStatus,
    pub optimum_bits: Option<Vec<bool>>,
    pub optimum: Option<ObjectiveValue>,
    pub candidates_tested: u64,
}

fn index_pattern(p: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| p & (1 << (n - 1 - i)) != 0).collect()
}

fn build_encoder(inst: &Instance) -> Result<Encoder, OracleError> {
    let mut enc = Encoder::new();
    for (name, sort) in &inst.declarations {
        enc.declare(name, *sort)
            .map_err(|e| OracleError::Build(e.to_string()))?;
    }
    for a in &inst.assertions {
        enc.assert_term(a)
            .map_err(|e| OracleError::Build(e.to_string()))?;
    }
    Ok(enc)
}

/// Whether `candidate` beats `best` in the instance's direction, by the
/// exact value order of the sort (never bit order).
fn better(objective: &Objective, candidate: &[bool], best: &[bool]) -> bool {
    match &objective.kind {
        ObjectiveKind::BitVec { signedness, .. } => {
            let c = BvConst::from_bits(candidate.to_vec())
                .unwrap()
                .value(*signedness);
            let b = BvConst::from_bits(best.to_vec()).unwrap().value(*signedness);
            match objective.direction {
                Direction::Minimize => c < b,
                Direction::Maximize => c > b,
            }
        }
        ObjectiveKind::Fp(s) => {
            let c = FpBits::from_bits(*s, candidate.to_vec()).unwrap();
            let b = FpBits::from_bits(*s, best.to_vec()).unwrap();
            match objective.direction {
                Direction::Minimize => fp::fp_lt(&c, &b).unwrap(),
                Direction::Maximize => fp::fp_gt(&c, &b).unwrap(),
            }
        }
    }
}

/// Tries every bit pattern of the objective as a block of assumptions
/// against one incremental solver, then ranks the feasible ones.
pub fn brute_force_opt(inst: &Instance) -> Result<OracleResult, OracleError> {
    let n = inst.objective.kind.width();
    if n > MAX_BRUTE_FORCE_BITS {
        return Err(OracleError::TooWide(n));
    }
    let mut enc = build_encoder(inst)?;
    let name = &inst.objective.name;
    let is_nan = |bits: &[bool]| match inst.objective.kind {
        ObjectiveKind::Fp(s) => FpBits::from_bits(s, bits.to_vec()).unwrap().is_nan(),
        ObjectiveKind::BitVec { .. } => false,
    };
    let mut best: Option<Vec<bool>> = None;
    let mut nan_witness: Option<Vec<bool>> = None;
    let total = 1u64 << n;
    for p in 0..total {
        let bits = index_pattern(p, n);
        let assumptions: Vec<_> = (0..n)
            .map(|i| enc.map().bit_lit(name, i, bits[i]).unwrap())
            .collect();
        if !enc.solve(&assumptions).is_sat() {
            continue;
        }
        if is_nan(&bits) {
            nan_witness.get_or_insert(bits);
        } else {
            match &best {
                Some(b) if !better(&inst.objective, &bits, b) => {}
                _ => best = Some(bits),
            }
        }
    }
    Ok(match (best, nan_witness) {
        (Some(bits), _) => OracleResult {
            status: OracleStatus::Optimum,
            optimum: Some(objective_value(&inst.objective.kind, &bits)),
            optimum_bits: Some(bits),
            candidates_tested: total,
        },
        (None, Some(bits)) => OracleResult {
            status: OracleStatus::NanOnly,
            optimum: Some(objective_value(&inst.objective.kind, &bits)),
            optimum_bits: Some(bits),
            candidates_tested: total,
        },
        (None, None) => OracleResult {
            status: OracleStatus::Unsat,
            optimum_bits: None,
            optimum: None,
            candidates_tested: total,
        },
    })
}

/// Certifies a claimed optimum with two fresh solver instances:
/// (a) the claim is feasible, and (b) nothing strictly better (and
/// non-NaN) is. A NaN claim instead demands that no non-NaN model exist.
pub fn verify_optimum(inst: &Instance, claimed: &[bool]) -> Result<bool, OracleError> {
    let n = inst.objective.kind.width();
    if claimed.len() != n {
        return Ok(false);
    }
    let name = &inst.objective.name;

    // (a) feasibility of the claimed pattern
    let mut feasible = build_encoder(inst)?;
    let assumptions: Vec<_> = (0..n)
        .map(|i| feasible.map().bit_lit(name, i, claimed[i]).unwrap())
        .collect();
    if !feasible.solve(&assumptions).is_sat() {
        return Ok(false);
    }

    // (b) no strictly better non-NaN value
    let mut improved = build_encoder(inst)?;
    let cost = match &inst.objective.kind {
        ObjectiveKind::BitVec { sort, .. } => Term::bv_var(name, *sort),
        ObjectiveKind::Fp(s) => Term::fp_var(name, *s),
    };
    let claimed_is_nan = match inst.objective.kind {
        ObjectiveKind::Fp(s) => FpBits::from_bits(s, claimed.to_vec()).unwrap().is_nan(),
        ObjectiveKind::BitVec { .. } => false,
    };
    if let ObjectiveKind::Fp(s) = inst.objective.kind {
        let not_nan =
            Term::negate(Term::new(TermKind::FpIsNan(Term::fp_var(name, s))).unwrap());
        improved
            .assert_term(&not_nan)
            .map_err(|e| OracleError::Build(e.to_string()))?;
    }
    if !claimed_is_nan {
        let strict = strict_improvement(&inst.objective, &cost, claimed);
        improved
            .assert_term(&strict)
            .map_err(|e| OracleError::Build(e.to_string()))?;
    }
    // for a NaN claim, any non-NaN model at all refutes it
    Ok(!improved.solve(&[]).is_sat())
}

fn strict_improvement(objective: &Objective, cost: &Term, claimed: &[bool]) -> Term {
    let minimize = objective.direction == Direction::Minimize;
    match &objective.kind {
        ObjectiveKind::BitVec { signedness, .. } => {
            let lit = Term::bv_lit(BvConst::from_bits(claimed.to_vec()).unwrap());
            let kind = match (signedness, minimize) {
                (Signedness::Unsigned, true) => TermKind::BvUlt(cost.clone(), lit),
                (Signedness::Unsigned, false) => TermKind::BvUgt(cost.clone(), lit),
                (Signedness::Signed, true) => TermKind::BvSlt(cost.clone(), lit),
                (Signedness::Signed, false) => TermKind::BvSgt(cost.clone(), lit),
            };
            Term::new(kind).unwrap()
        }
        ObjectiveKind::Fp(s) => {
            let lit = Term::fp_lit(FpBits::from_bits(*s, claimed.to_vec()).unwrap());
            let kind = if minimize {
                TermKind::FpLt(cost.clone(), lit)
            } else {
                TermKind::FpGt(cost.clone(), lit)
            };
            Term::new(kind).unwrap()
        }
    }
}

// ---------------------------------------------------------------------------
// instance generation

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenSort {
    Fp(FpSort),
    BitVec(BvSort, Signedness),
}

impl GenSort {
    /// Accepts `(3 5)`, `(_ FloatingPoint 3 5)`, `bv6`, or `bv6:signed`.
    pub fn parse(text: &str) -> Result<GenSort, String> {
        let t = text.trim();
        if let Some(rest) = t.strip_prefix("bv") {
            let (width, signed) = match rest.split_once(':') {
                Some((w, "signed")) => (w, Signedness::Signed),
                Some((w, "unsigned")) => (w, Signedness::Unsigned),
                Some((_, other)) => return Err(format!("unknown signedness `{other}`")),
                None => (rest, Signedness::Unsigned),
            };
            let w: usize = width
                .parse()
                .map_err(|_| format!("bad bit-vector width in `{t}`"))?;
            let sort = BvSort::new(w).map_err(|e| e.to_string())?;
            return Ok(GenSort::BitVec(sort, signed));
        }
        let inner = t
            .trim_start_matches('(')
            .trim_end_matches(')')
            .replace('_', " ");
        let nums: Vec<u32> = inner
            .split_whitespace()
            .filter(|w| !matches!(*w, "FloatingPoint" | "FP"))
            .map(|w| w.parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("cannot read FP sort from `{t}`"))?;
        match nums.as_slice() {
            [e, s] => FpSort::new(*e, *s)
                .map(GenSort::Fp)
                .map_err(|err| err.to_string()),
            _ => Err(format!("expected two numbers in FP sort `{t}`")),
        }
    }

    fn term_sort(&self) -> Sort {
        match self {
            GenSort::Fp(s) => Sort::Fp(*s),
            GenSort::BitVec(s, _) => Sort::BitVec(*s),
        }
    }
}

impl fmt::Display for GenSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenSort::Fp(s) => write!(f, "{s}"),
            GenSort::BitVec(s, Signedness::Unsigned) => write!(f, "{s}"),
            GenSort::BitVec(s, Signedness::Signed) => write!(f, "{s} signed"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// random boolean combinations of comparisons
    Mixed,
    /// like `mixed`, but a third of the instances force a NaN objective
    NanHeavy,
}

impl Profile {
    pub fn parse(text: &str) -> Result<Profile, String> {
        match text {
            "mixed" => Ok(Profile::Mixed),
            "nan-heavy" => Ok(Profile::NanHeavy),
            other => Err(format!("unknown profile `{other}` (mixed, nan-heavy)")),
        }
    }
}

struct Gen<'a> {
    rng: &'a mut StdRng,
    sort: GenSort,
    cost: Term,
    aux: Term,
}

impl Gen<'_> {
    fn random_pattern(&mut self, width: usize) -> Vec<bool> {
        (0..width).map(|_| self.rng.random_bool(0.5)).collect()
    }

    fn operand(&mut self, force_cost: bool) -> Term {
        let pick = if force_cost {
            0
        } else {
            self.rng.random_range(0..4)
        };
        match pick {
            0 => self.cost.clone(),
            1 => self.aux.clone(),
            _ => match self.sort {
                GenSort::Fp(s) => {
                    let bits = self.random_pattern(s.total_bits());
                    Term::fp_lit(FpBits::from_bits(s, bits).unwrap())
                }
                GenSort::BitVec(s, _) => {
                    let bits = self.random_pattern(s.width());
                    Term::bv_lit(BvConst::from_bits(bits).unwrap())
                }
            },
        }
    }

    fn leaf(&mut self, force_cost: bool) -> Term {
        let a = self.operand(force_cost);
        let mut b = self.operand(false);
        if a == b {
            b = self.operand(false);
        }
        let op = self.rng.random_range(0..5);
        let kind = match self.sort {
            GenSort::Fp(_) => match op {
                0 => TermKind::FpLeq(a, b),
                1 => TermKind::FpLt(a, b),
                2 => TermKind::FpGeq(a, b),
                3 => TermKind::FpGt(a, b),
                _ => TermKind::FpEq(a, b),
            },
            GenSort::BitVec(_, Signedness::Unsigned) => match op {
                0 => TermKind::BvUle(a, b),
                1 => TermKind::BvUlt(a, b),
                2 => TermKind::BvUge(a, b),
                3 => TermKind::BvUgt(a, b),
                _ => TermKind::Eq(a, b),
            },
            GenSort::BitVec(_, Signedness::Signed) => match op {
                0 => TermKind::BvSle(a, b),
                1 => TermKind::BvSlt(a, b),
                2 => TermKind::BvSge(a, b),
                3 => TermKind::BvSgt(a, b),
                _ => TermKind::Eq(a, b),
            },
        };
        Term::new(kind).expect("operands share the sort")
    }

    fn tree(&mut self, depth: usize, force_cost: bool) -> Term {
        if depth == 0 || self.rng.random_bool(0.35) {
            return self.leaf(force_cost);
        }
        match self.rng.random_range(0..4) {
            0 => {
                let kids = (0..self.rng.random_range(2..=3))
                    .map(|i| self.tree(depth - 1, force_cost && i == 0))
                    .collect();
                Term::and(kids)
            }
            1 => {
                let kids = (0..self.rng.random_range(2..=3))
                    .map(|i| self.tree(depth - 1, force_cost && i == 0))
                    .collect();
                Term::or(kids)
            }
            2 => Term::negate(self.tree(depth - 1, force_cost)),
            _ => {
                let a = self.tree(depth - 1, false);
                let b = self.tree(depth - 1, force_cost);
                Term::new(TermKind::Implies(a, b)).unwrap()
            }
        }
    }
}

/// Generates `count` single-objective scripts, deterministically from the
/// seed. Each comes with a stable file name.
pub fn generate_instances(
    seed: u64,
    sort: GenSort,
    count: usize,
    profile: Profile,
) -> Result<Vec<(String, Script)>, String> {
    if matches!((profile, sort), (Profile::NanHeavy, GenSort::BitVec(..))) {
        return Err("profile nan-heavy needs an FP sort".to_string());
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut commands = vec![Command::SetLogic("QF_BVFP".to_string())];
        commands.push(Command::DeclareConst("cost".to_string(), sort.term_sort()));
        commands.push(Command::DeclareConst("aux".to_string(), sort.term_sort()));
        let (cost, aux) = match sort {
            GenSort::Fp(s) => (Term::fp_var("cost", s), Term::fp_var("aux", s)),
            GenSort::BitVec(s, _) => (Term::bv_var("cost", s), Term::bv_var("aux", s)),
        };
        let nan_forced = matches!(profile, Profile::NanHeavy) && rng.random_bool(1.0 / 3.0);
        if nan_forced {
            commands.push(Command::Assert(
                Term::new(TermKind::FpIsNan(cost.clone())).unwrap(),
            ));
        } else {
            let mut generator = Gen {
                rng: &mut rng,
                sort,
                cost: cost.clone(),
                aux,
            };
            let depth = generator.rng.random_range(1..=4);
            let body = generator.tree(depth, true);
            commands.push(Command::Assert(body));
        }
        let direction = if rng.random_bool(0.5) {
            Direction::Minimize
        } else {
            Direction::Maximize
        };
        commands.push(Command::Objective {
            term: cost,
            direction,
            signed: matches!(sort, GenSort::BitVec(_, Signedness::Signed)),
        });
        commands.push(Command::CheckSat);
        commands.push(Command::GetObjectives);
        out.push((format!("inst_{seed}_{i:04}.smt2"), Script { commands }));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// benchmark runner

/// One engine configuration of a benchmark run, e.g. `ofp-bs+bp+pi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub engine: EngineKind,
    pub bp: bool,
    pub pi: bool,
    pub so: bool,
}

impl BenchConfig {
    pub fn parse(text: &str) -> Result<BenchConfig, String> {
        let mut parts = text.split('+');
        let engine = parts
            .next()
            .and_then(EngineKind::parse)
            .ok_or_else(|| format!("unknown engine in `{text}`"))?;
        let mut cfg = BenchConfig {
            engine,
            bp: false,
            pi: false,
            so: false,
        };
        for p in parts {
            match p {
                "bp" => cfg.bp = true,
                "pi" => cfg.pi = true,
                "so" => cfg.so = true,
                other => return Err(format!("unknown enhancement `{other}` in `{text}`")),
            }
        }
        Ok(cfg)
    }

    fn engine_config(&self, timeout: Option<Duration>) -> EngineConfig {
        let mut cfg = EngineConfig::new(self.engine);
        cfg.bp = self.bp;
        cfg.pi = self.pi;
        cfg.so = self.so;
        cfg.rho = BigRational::new(BigInt::one(), BigInt::from(2));
        cfg.timeout = timeout;
        cfg
    }
}

impl fmt::Display for BenchConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.engine.name())?;
        if self.bp {
            write!(f, "+bp")?;
        }
        if self.pi {
            write!(f, "+pi")?;
        }
        if self.so {
            write!(f, "+so")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub instance: String,
    pub config: BenchConfig,
    pub status: String,
    pub optimum: String,
    pub smt_calls: u64,
    pub wall_ms: u128,
    pub oracle_agreement: Option<bool>,
}

pub const CSV_HEADER: &str =
    "instance,engine,bp,pi,so,status,optimum,smt_calls,wall_ms,oracle_agreement";

impl BenchRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.config.engine.name(),
            self.config.bp as u8,
            self.config.pi as u8,
            self.config.so as u8,
            self.status,
            self.optimum,
            self.smt_calls,
            self.wall_ms,
            self.oracle_agreement
                .map_or(String::new(), |b| b.to_string()),
        )
    }
}

fn run_pair(
    name: &str,
    inst: &Instance,
    config: &BenchConfig,
    timeout: Option<Duration>,
) -> BenchRow {
    let cfg = config.engine_config(timeout);
    let base = BenchRow {
        instance: name.to_string(),
        config: config.clone(),
        status: String::new(),
        optimum: String::new(),
        smt_calls: 0,
        wall_ms: 0,
        oracle_agreement: None,
    };
    let result = match solve_instance(inst, &cfg) {
        Ok(r) => r,
        Err(e) => {
            return BenchRow {
                status: format!("error: {e}"),
                ..base
            }
        }
    };
    let mut row = BenchRow {
        smt_calls: result.stats.smt_calls,
        wall_ms: result.stats.wall.as_millis(),
        ..base
    };
    if result.partial {
        row.status = "timeout".to_string();
        return row;
    }
    row.status = match result.status {
        OptStatus::Unsat => "unsat",
        OptStatus::NanOnly => "nan-only",
        OptStatus::Optimum => "optimum",
    }
    .to_string();
    if let Some(v) = &result.optimum {
        row.optimum = v.to_string();
    }
    // certify: claimed bits verified, plus full enumeration when feasible
    row.oracle_agreement = Some(match result.status {
        OptStatus::Unsat => match brute_force_opt(inst) {
            Ok(o) => o.status == OracleStatus::Unsat,
            Err(_) => true, // too wide to enumerate; nothing to cross-check
        },
        _ => {
            let bits = result.optimum_bits.as_deref().unwrap();
            let verified = verify_optimum(inst, bits).unwrap_or(false);
            let enumerated = match brute_force_opt(inst) {
                Ok(o) => {
                    (o.status == OracleStatus::NanOnly) == (result.status == OptStatus::NanOnly)
                        && match (&o.optimum, &result.optimum) {
                            (Some(a), Some(b)) => values_agree(a, b),
                            _ => false,
                        }
                }
                Err(_) => true,
            };
            verified && enumerated
        }
    });
    row
}

/// Runs every instance under every configuration on a work pool and
/// returns the rows in deterministic (instance, config) order plus the
/// per-configuration summary lines.
pub fn run_bench(
    instances: &[(String, Instance)],
    configs: &[BenchConfig],
    timeout: Option<Duration>,
    jobs: usize,
) -> (Vec<BenchRow>, Vec<String>) {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let pairs: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..configs.len()).map(move |c| (i, c)))
        .collect();
    let mut rows: Vec<((usize, usize), BenchRow)> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(i, c)| {
                let (name, inst) = &instances[i];
                ((i, c), run_pair(name, inst, &configs[c], timeout))
            })
            .collect()
    });
    rows.sort_by_key(|(k, _)| *k);
    let rows: Vec<BenchRow> = rows.into_iter().map(|(_, r)| r).collect();
    let mut summary = Vec::new();
    for (c, config) in configs.iter().enumerate() {
        let mine: Vec<&BenchRow> = rows
            .iter()
            .enumerate()
            .filter(|(i, _)| i % configs.len() == c)
            .map(|(_, r)| r)
            .collect();
        let solved = mine
            .iter()
            .filter(|r| matches!(r.status.as_str(), "optimum" | "nan-only" | "unsat"))
            .count();
        let timeouts = mine.iter().filter(|r| r.status == "timeout").count();
        let total_ms: u128 = mine.iter().map(|r| r.wall_ms).sum();
        summary.push(format!(
            "# config={config} instances={} solved={solved} timeouts={timeouts} total_wall_ms={total_ms}",
            mine.len()
        ));
    }
    (rows, summary)
}

/// Loads `.smt2` files from a directory into instances, sorted by name.
pub fn load_instances(dir: &std::path::Path) -> Result<Vec<(String, Instance)>, String> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "smt2"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for path in files {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let text =
            std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let script = parse_script(&text).map_err(|e| format!("{name}: {e}"))?;
        let inst = script_instance(&script).map_err(|e| format!("{name}: {e}"))?;
        out.push((name, inst));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::FpValue;

    fn fp35() -> FpSort {
        FpSort::new(3, 5).unwrap()
    }

    fn worked_instance() -> Instance {
        let s = fp35();
        Instance {
            declarations: vec![("cost".to_string(), Sort::Fp(s))],
            assertions: vec![Term::new(TermKind::FpGeq(
                Term::fp_var("cost", s),
                Term::fp_lit(FpBits::from_fields(s, "0", "110", "1101").unwrap()),
            ))
            .unwrap()],
            objective: Objective {
                name: "cost".to_string(),
                direction: Direction::Minimize,
                kind: ObjectiveKind::Fp(s),
            },
        }
    }

    #[test]
    fn brute_force_certifies_the_worked_instance() {
        let inst = worked_instance();
        let res = brute_force_opt(&inst).unwrap();
        assert_eq!(res.status, OracleStatus::Optimum);
        assert_eq!(res.candidates_tested, 256);
        assert_eq!(
            res.optimum_bits.as_deref().unwrap(),
            FpBits::from_fields(fp35(), "0", "110", "1101")
                .unwrap()
                .bits()
        );
        assert_eq!(res.optimum.unwrap().to_string(), "29/2");
    }

    #[test]
    fn brute_force_sees_unconstrained_and_nan_only_cases() {
        let s = fp35();
        let mut inst = worked_instance();
        inst.assertions.clear();
        let res = brute_force_opt(&inst).unwrap();
        assert_eq!(
            res.optimum_bits.as_deref().unwrap(),
            FpBits::negative_infinity(s).bits()
        );
        inst.assertions = vec![Term::new(TermKind::FpIsNan(Term::fp_var("cost", s))).unwrap()];
        let res = brute_force_opt(&inst).unwrap();
        assert_eq!(res.status, OracleStatus::NanOnly);
        assert_eq!(res.optimum.unwrap(), ObjectiveValue::Fp(FpValue::Nan));
        inst.assertions = vec![Term::truth(false)];
        assert_eq!(brute_force_opt(&inst).unwrap().status, OracleStatus::Unsat);
    }

    #[test]
    fn width_guardrail_is_enforced() {
        let sort = BvSort::new(20).unwrap();
        let inst = Instance {
            declarations: vec![("cost".to_string(), Sort::BitVec(sort))],
            assertions: vec![],
            objective: Objective {
                name: "cost".to_string(),
                direction: Direction::Minimize,
                kind: ObjectiveKind::BitVec {
                    sort,
                    signedness: Signedness::Unsigned,
                },
            },
        };
        assert!(matches!(
            brute_force_opt(&inst),
            Err(OracleError::TooWide(20))
        ));
    }

    #[test]
    fn verifier_accepts_the_optimum_and_rejects_others() {
        let s = fp35();
        let inst = worked_instance();
        let best = FpBits::from_fields(s, "0", "110", "1101").unwrap();
        let worse = FpBits::from_fields(s, "0", "110", "1111").unwrap(); // 31/2
        let infeasible = FpBits::positive_zero(s);
        assert!(verify_optimum(&inst, best.bits()).unwrap());
        assert!(!verify_optimum(&inst, worse.bits()).unwrap());
        assert!(!verify_optimum(&inst, infeasible.bits()).unwrap());
    }

    #[test]
    fn verifier_handles_nan_claims() {
        let s = fp35();
        let mut inst = worked_instance();
        inst.assertions = vec![Term::new(TermKind::FpIsNan(Term::fp_var("cost", s))).unwrap()];
        assert!(verify_optimum(&inst, fp::canonical_nan(s).bits()).unwrap());
        // NaN claim on an instance with real models must fail
        let real = worked_instance();
        assert!(!verify_optimum(&real, fp::canonical_nan(s).bits()).unwrap());
    }

    #[test]
    fn generation_is_deterministic_and_parseable() {
        let sort = GenSort::Fp(fp35());
        let a = generate_instances(1, sort, 10, Profile::Mixed).unwrap();
        let b = generate_instances(1, sort, 10, Profile::Mixed).unwrap();
        let texts: Vec<String> = a.iter().map(|(_, s)| s.to_string()).collect();
        assert_eq!(
            texts,
            b.iter().map(|(_, s)| s.to_string()).collect::<Vec<_>>()
        );
        let mut satisfiable = 0;
        for (name, script) in &a {
            let reparsed = parse_script(&script.to_string()).expect(name);
            let inst = script_instance(&reparsed).unwrap();
            if brute_force_opt(&inst).unwrap().status != OracleStatus::Unsat {
                satisfiable += 1;
            }
        }
        assert!(satisfiable >= 1, "at least one satisfiable instance");
    }

    #[test]
    fn nan_heavy_profile_hits_its_quota() {
        let sort = GenSort::Fp(fp35());
        let batch = generate_instances(7, sort, 30, Profile::NanHeavy).unwrap();
        let mut nan_only = 0;
        for (_, script) in &batch {
            let inst = script_instance(script).unwrap();
            if brute_force_opt(&inst).unwrap().status == OracleStatus::NanOnly {
                nan_only += 1;
            }
        }
        assert!(
            nan_only * 5 >= batch.len(),
            "expected at least 20% NaN-only, got {nan_only}/30"
        );
        assert!(generate_instances(
            1,
            GenSort::BitVec(BvSort::new(4).unwrap(), Signedness::Unsigned),
            1,
            Profile::NanHeavy
        )
        .is_err());
    }

    #[test]
    fn bench_rows_follow_the_schema_and_agree() {
        let sort = GenSort::Fp(FpSort::new(2, 3).unwrap());
        let scripts = generate_instances(3, sort, 4, Profile::Mixed).unwrap();
        let instances: Vec<(String, Instance)> = scripts
            .iter()
            .map(|(n, s)| (n.clone(), script_instance(s).unwrap()))
            .collect();
        let configs = vec![
            BenchConfig::parse("ofp-bs").unwrap(),
            BenchConfig::parse("ofp-bs+pi").unwrap(),
            BenchConfig::parse("omt-lin").unwrap(),
            BenchConfig::parse("omt-bin").unwrap(),
        ];
        let (rows, summary) = run_bench(&instances, &configs, None, 2);
        assert_eq!(rows.len(), 16);
        assert_eq!(summary.len(), 4);
        assert_eq!(CSV_HEADER.split(',').count(), 10);
        for row in &rows {
            assert_eq!(row.csv_line().split(',').count(), 10);
            assert_eq!(row.oracle_agreement, Some(true), "{}", row.csv_line());
        }
    }

    #[test]
    fn config_strings_round_trip() {
        for text in ["ofp-bs", "obv-bs+bp", "omt-lin+bp+pi+so", "omt-bin+pi"] {
            let cfg = BenchConfig::parse(text).unwrap();
            assert_eq!(cfg.to_string(), text);
        }
        assert!(BenchConfig::parse("mystery").is_err());
        assert!(BenchConfig::parse("ofp-bs+zz").is_err());
    }

    #[test]
    fn gen_sort_specs_parse() {
        assert_eq!(GenSort::parse("(3 5)").unwrap(), GenSort::Fp(fp35()));
        assert_eq!(
            GenSort::parse("(_ FloatingPoint 3 5)").unwrap(),
            GenSort::Fp(fp35())
        );
        assert_eq!(
            GenSort::parse("bv6:signed").unwrap(),
            GenSort::BitVec(BvSort::new(6).unwrap(), Signedness::Signed)
        );
        assert!(GenSort::parse("nonsense").is_err());
    }
}
