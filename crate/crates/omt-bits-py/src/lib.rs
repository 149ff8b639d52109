//! Python bindings: parse and optimize SMT-LIB scripts, inspect FP bit
//! patterns, and certify optima with the brute-force oracle.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use omt_bits::bitvec::{self, BvConst, BvSort, Direction, Signedness};
use omt_bits::engines::{solve_instance, EngineKind, OptStatus};
use omt_bits::fp::{FpBits, FpSort as CoreFpSort};
use omt_bits::frontend::{interpret, parse_script, script_instance, RunConfig};
use omt_bits::oracle::{
    brute_force_opt, generate_instances, verify_optimum, GenSort, OracleStatus, Profile,
};
use omt_bits::engines::ModelValue;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::time::Duration;

fn value_err(msg: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(msg.to_string())
}

fn parse_bits(text: &str) -> PyResult<Vec<bool>> {
    let raw = text.strip_prefix("#b").unwrap_or(text);
    raw.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(value_err(format!("bad bit `{c}` in pattern `{text}`"))),
        })
        .collect()
}

fn bits_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn parse_rho(text: &str) -> PyResult<BigRational> {
    let rho = if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(value_err)?;
        let q: BigInt = q.trim().parse().map_err(value_err)?;
        if q.is_zero() {
            return Err(value_err("rho denominator is zero"));
        }
        BigRational::new(p, q)
    } else if let Some((int, frac)) = text.split_once('.') {
        let num: BigInt = format!("{int}{frac}").parse().map_err(value_err)?;
        BigRational::new(num, BigInt::from(10u8).pow(frac.len() as u32))
    } else {
        BigRational::from_integer(text.trim().parse().map_err(value_err)?)
    };
    if rho <= BigRational::zero() || rho >= BigRational::one() {
        return Err(value_err("rho must lie strictly between 0 and 1"));
    }
    Ok(rho)
}

fn run_config(
    engine: Option<&str>,
    bp: bool,
    pi: bool,
    so: bool,
    rho: Option<&str>,
    timeout: Option<f64>,
) -> PyResult<RunConfig> {
    let engine = match engine {
        None => None,
        Some(name) => Some(
            EngineKind::parse(name).ok_or_else(|| value_err(format!("unknown engine `{name}`")))?,
        ),
    };
    Ok(RunConfig {
        engine,
        bp,
        pi,
        so,
        rho: rho.map_or_else(
            || Ok(BigRational::new(BigInt::one(), BigInt::from(2))),
            parse_rho,
        )?,
        timeout: timeout.map(Duration::from_secs_f64),
        dump_cnf: None,
    })
}

/// Optimizes the script's objective and returns a result dict with the
/// status, exact optimum value, optimum bit pattern, statistics, and the
/// full model.
#[pyfunction]
#[pyo3(signature = (text, engine=None, bp=false, pi=false, so=false, rho=None, timeout=None))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    text: &str,
    engine: Option<&str>,
    bp: bool,
    pi: bool,
    so: bool,
    rho: Option<&str>,
    timeout: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = run_config(engine, bp, pi, so, rho, timeout)?;
    let script = parse_script(text).map_err(value_err)?;
    let inst = script_instance(&script).map_err(value_err)?;
    let engine_cfg = cfg.engine_config(&inst.objective.kind);
    engine_cfg.validate().map_err(value_err)?;
    let result = solve_instance(&inst, &engine_cfg).map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item(
        "status",
        match result.status {
            OptStatus::Unsat => "unsat",
            OptStatus::NanOnly => "nan-only",
            OptStatus::Optimum => "optimum",
        },
    )?;
    out.set_item("objective", &inst.objective.name)?;
    out.set_item("value", result.optimum.as_ref().map(|v| v.to_string()))?;
    out.set_item(
        "bits",
        result.optimum_bits.as_deref().map(bits_string),
    )?;
    out.set_item("smt_calls", result.stats.smt_calls)?;
    out.set_item("wall_ms", result.stats.wall.as_millis())?;
    out.set_item("partial", result.partial)?;
    let model = PyDict::new(py);
    if let Some(m) = &result.model {
        for (name, value) in m {
            match value {
                ModelValue::Bool(b) => model.set_item(name, *b)?,
                ModelValue::Word(bits) => model.set_item(name, bits_string(bits))?,
            }
        }
    }
    out.set_item("model", model)?;
    Ok(out)
}

/// Runs a script through the command interpreter and returns everything
/// it printed (`sat`, objectives, model), like the CLI would.
#[pyfunction]
#[pyo3(signature = (text, engine=None, bp=false, pi=false, so=false, rho=None, timeout=None))]
#[allow(clippy::too_many_arguments)]
fn run_script(
    text: &str,
    engine: Option<&str>,
    bp: bool,
    pi: bool,
    so: bool,
    rho: Option<&str>,
    timeout: Option<f64>,
) -> PyResult<String> {
    let cfg = run_config(engine, bp, pi, so, rho, timeout)?;
    let script = parse_script(text).map_err(value_err)?;
    let mut out = Vec::new();
    interpret(&script, &cfg, &mut out).map_err(value_err)?;
    Ok(String::from_utf8(out).expect("interpreter emits UTF-8"))
}

/// Brute-force optimum by trying every objective pattern (guardrailed to
/// small sorts); the independent cross-check for `solve`.
#[pyfunction]
fn brute_force<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyDict>> {
    let script = parse_script(text).map_err(value_err)?;
    let inst = script_instance(&script).map_err(value_err)?;
    let res = brute_force_opt(&inst).map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item(
        "status",
        match res.status {
            OracleStatus::Unsat => "unsat",
            OracleStatus::NanOnly => "nan-only",
            OracleStatus::Optimum => "optimum",
        },
    )?;
    out.set_item("value", res.optimum.as_ref().map(|v| v.to_string()))?;
    out.set_item("bits", res.optimum_bits.as_deref().map(bits_string))?;
    out.set_item("candidates_tested", res.candidates_tested)?;
    Ok(out)
}

/// Certifies that `bits` is the script's optimum: feasible, and nothing
/// strictly better is.
#[pyfunction]
fn verify(text: &str, bits: &str) -> PyResult<bool> {
    let script = parse_script(text).map_err(value_err)?;
    let inst = script_instance(&script).map_err(value_err)?;
    verify_optimum(&inst, &parse_bits(bits)?).map_err(value_err)
}

/// Generates deterministic instance scripts; returns (name, text) pairs.
/// Sorts: `(3 5)`, `bv6`, `bv6:signed`; profiles: `mixed`, `nan-heavy`.
#[pyfunction]
#[pyo3(signature = (seed, sort, count, profile="mixed"))]
fn generate(seed: u64, sort: &str, count: usize, profile: &str) -> PyResult<Vec<(String, String)>> {
    let sort = GenSort::parse(sort).map_err(value_err)?;
    let profile = Profile::parse(profile).map_err(value_err)?;
    let batch = generate_instances(seed, sort, count, profile).map_err(value_err)?;
    Ok(batch
        .into_iter()
        .map(|(name, script)| (name, script.to_string()))
        .collect())
}

/// Exact integer value of a bit pattern (`#b` prefix optional) under the
/// chosen signedness.
#[pyfunction]
#[pyo3(signature = (bits, signed=false))]
fn bv_value(bits: &str, signed: bool) -> PyResult<BigInt> {
    let c = BvConst::from_bits(parse_bits(bits)?).map_err(value_err)?;
    Ok(c.value(if signed {
        Signedness::Signed
    } else {
        Signedness::Unsigned
    }))
}

/// The extremal value of a bit-vector sort: the fixed target of the
/// bit-level search.
#[pyfunction]
#[pyo3(signature = (width, signed=false, maximize=false))]
fn bv_attractor(width: usize, signed: bool, maximize: bool) -> PyResult<String> {
    let sort = BvSort::new(width).map_err(value_err)?;
    let sign = if signed {
        Signedness::Signed
    } else {
        Signedness::Unsigned
    };
    let dir = if maximize {
        Direction::Maximize
    } else {
        Direction::Minimize
    };
    Ok(bits_string(bitvec::attractor(sort, sign, dir).bits()))
}

/// A floating-point sort: classify patterns, read exact values, and
/// produce the special constants.
#[pyclass(frozen)]
struct FpSort {
    inner: CoreFpSort,
}

impl FpSort {
    fn pattern(&self, bits: &str) -> PyResult<FpBits> {
        FpBits::from_bits(self.inner, parse_bits(bits)?).map_err(value_err)
    }
}

#[pymethods]
impl FpSort {
    #[new]
    fn new(ebits: u32, sbits: u32) -> PyResult<Self> {
        Ok(FpSort {
            inner: CoreFpSort::new(ebits, sbits).map_err(value_err)?,
        })
    }

    #[getter]
    fn ebits(&self) -> u32 {
        self.inner.ebits()
    }

    #[getter]
    fn sbits(&self) -> u32 {
        self.inner.sbits()
    }

    #[getter]
    fn total_bits(&self) -> usize {
        self.inner.total_bits()
    }

    /// "nan", "+oo", "-oo", "+zero", "-zero", "normal", or "subnormal".
    fn classify(&self, bits: &str) -> PyResult<String> {
        use omt_bits::fp::FpClass::*;
        Ok(match self.pattern(bits)?.classify() {
            Nan => "nan",
            PosInf => "+oo",
            NegInf => "-oo",
            PosZero => "+zero",
            NegZero => "-zero",
            Normal => "normal",
            Subnormal => "subnormal",
        }
        .to_string())
    }

    /// Exact value as a string: a rational like `29/2`, `-0`, `+oo`, `NaN`.
    fn value(&self, bits: &str) -> PyResult<String> {
        Ok(self.pattern(bits)?.value().to_string())
    }

    fn canonical_nan(&self) -> String {
        bits_string(omt_bits::fp::canonical_nan(self.inner).bits())
    }

    #[pyo3(signature = (negative=false))]
    fn infinity(&self, negative: bool) -> String {
        let p = if negative {
            FpBits::negative_infinity(self.inner)
        } else {
            FpBits::positive_infinity(self.inner)
        };
        bits_string(p.bits())
    }

    fn __repr__(&self) -> String {
        format!("FpSort({}, {})", self.inner.ebits(), self.inner.sbits())
    }
}

#[pymodule]
fn omt_bits_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<FpSort>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_script, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(bv_value, m)?)?;
    m.add_function(wrap_pyfunction!(bv_attractor, m)?)?;
    Ok(())
}
