//! Executes a parsed script: declarations and assertions accumulate,
//! `check-sat` runs the configured engine (or a plain satisfiability
//! check when no objective is present), and the query commands print in
//! the stable line-oriented output format.

use super::script::{Command, Script};
use crate::bitvec::{BvConst, Signedness};
use crate::blast::{Encoder, Sort, Term};
use crate::engines::{
    solve_instance, EngineConfig, EngineKind, Instance, ModelValue, Objective, ObjectiveKind,
    OptResult, OptStatus,
};
use crate::fp::FpBits;
use crate::sat::SatResult;
use num::rational::BigRational;
use num::{BigInt, One};
use std::collections::HashMap;
use std::io::Write;
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InterpError {
    #[error("command {index}: {message}")]
    Command { index: usize, message: String },
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

/// Solver options as they arrive from the command line; the engine is
/// resolved per objective sort when left unspecified.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub engine: Option<EngineKind>,
    pub bp: bool,
    pub pi: bool,
    pub so: bool,
    pub rho: BigRational,
    pub timeout: Option<Duration>,
    pub dump_cnf: Option<std::path::PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            engine: None,
            bp: false,
            pi: false,
            so: false,
            rho: BigRational::new(BigInt::one(), BigInt::from(2)),
            timeout: None,
            dump_cnf: None,
        }
    }
}

impl RunConfig {
    pub fn engine_config(&self, kind: &ObjectiveKind) -> EngineConfig {
        let engine = self.engine.unwrap_or(match kind {
            ObjectiveKind::BitVec { .. } => EngineKind::ObvBs,
            ObjectiveKind::Fp(_) => EngineKind::OfpBs,
        });
        let mut cfg = EngineConfig::new(engine);
        cfg.bp = self.bp;
        cfg.pi = self.pi;
        cfg.so = self.so;
        cfg.rho = self.rho.clone();
        cfg.timeout = self.timeout;
        cfg
    }
}

/// Collects a script's declarations, assertions, and objective into a
/// solver-ready instance. Fails when the script has no objective.
pub fn script_instance(script: &Script) -> Result<Instance, String> {
    let mut declarations = Vec::new();
    let mut assertions = Vec::new();
    let mut objective = None;
    for cmd in &script.commands {
        match cmd {
            Command::DeclareConst(name, sort) => declarations.push((name.clone(), *sort)),
            Command::Assert(t) => assertions.push(t.clone()),
            Command::Objective {
                term,
                direction,
                signed,
            } => {
                let name = term.var_name().expect("normalized objective").to_string();
                let kind = match term.sort() {
                    Sort::BitVec(sort) => ObjectiveKind::BitVec {
                        sort,
                        signedness: if *signed {
                            Signedness::Signed
                        } else {
                            Signedness::Unsigned
                        },
                    },
                    Sort::Fp(s) => ObjectiveKind::Fp(s),
                    Sort::Bool => unreachable!("parser rejects boolean objectives"),
                };
                objective = Some(Objective {
                    name,
                    direction: *direction,
                    kind,
                });
            }
            _ => {}
        }
    }
    Ok(Instance {
        declarations,
        assertions,
        objective: objective.ok_or("script has no objective")?,
    })
}

/// What the last `check-sat` produced.
enum Checked {
    Plain {
        sat: bool,
        model: Option<HashMap<String, ModelValue>>,
    },
    Optimized {
        objective: Objective,
        result: OptResult,
    },
}

#[derive(Debug, Default, Clone)]
pub struct RunSummary {
    /// Solver calls and wall time of the last optimizing check-sat.
    pub smt_calls: Option<u64>,
    pub wall: Option<Duration>,
}

struct Interp {
    declarations: Vec<(String, Sort)>,
    assertions: Vec<Term>,
    objective: Option<Objective>,
    checked: Option<Checked>,
    summary: RunSummary,
}

/// Runs a script, writing results to `out`. Engine errors surface with
/// the index of the offending command; malformed queries (get-model
/// before check-sat) print nothing, keeping harness pipelines simple.
pub fn interpret(
    script: &Script,
    cfg: &RunConfig,
    out: &mut impl Write,
) -> Result<RunSummary, InterpError> {
    let mut st = Interp {
        declarations: Vec::new(),
        assertions: Vec::new(),
        objective: None,
        checked: None,
        summary: RunSummary::default(),
    };
    for (index, cmd) in script.commands.iter().enumerate() {
        let fail = |message: String| InterpError::Command { index, message };
        match cmd {
            Command::SetLogic(_) | Command::SetOption(..) | Command::SetInfo(..) => {}
            Command::DeclareConst(name, sort) => {
                st.declarations.push((name.clone(), *sort));
            }
            Command::DefineFun { .. } => {
                // macros were already expanded at parse time
            }
            Command::Assert(t) => st.assertions.push(t.clone()),
            Command::Objective {
                term,
                direction,
                signed,
            } => {
                let name = term.var_name().expect("normalized objective").to_string();
                let kind = match term.sort() {
                    Sort::BitVec(sort) => ObjectiveKind::BitVec {
                        sort,
                        signedness: if *signed {
                            Signedness::Signed
                        } else {
                            Signedness::Unsigned
                        },
                    },
                    Sort::Fp(s) => ObjectiveKind::Fp(s),
                    Sort::Bool => unreachable!("parser rejects boolean objectives"),
                };
                st.objective = Some(Objective {
                    name,
                    direction: *direction,
                    kind,
                });
            }
            Command::CheckSat => {
                check_sat(&mut st, cfg).map_err(fail)?;
                let line = match &st.checked {
                    Some(Checked::Plain { sat, .. }) => {
                        if *sat {
                            "sat"
                        } else {
                            "unsat"
                        }
                    }
                    Some(Checked::Optimized { result, .. }) => match result.status {
                        OptStatus::Unsat => "unsat",
                        _ => "sat",
                    },
                    None => unreachable!(),
                };
                writeln!(out, "{line}")?;
            }
            Command::GetModel => print_model(&st, out)?,
            Command::GetObjectives => print_objectives(&st, out)?,
            Command::Exit => break,
        }
    }
    Ok(st.summary)
}

/// Writes the bit-blasted assertion set as DIMACS; engine-added cuts and
/// learnt clauses are not part of the dump.
fn dump_blasted(st: &Interp, path: &std::path::Path) -> Result<(), String> {
    let mut enc = Encoder::new();
    for (name, sort) in &st.declarations {
        enc.declare(name, *sort).map_err(|e| e.to_string())?;
    }
    for a in &st.assertions {
        enc.assert_term(a).map_err(|e| e.to_string())?;
    }
    let mut file = std::fs::File::create(path).map_err(|e| e.to_string())?;
    enc.solver()
        .dump_dimacs(&mut file)
        .map_err(|e| e.to_string())
}

fn check_sat(st: &mut Interp, cfg: &RunConfig) -> Result<(), String> {
    if let Some(path) = &cfg.dump_cnf {
        dump_blasted(st, path)?;
    }
    match &st.objective {
        Some(objective) => {
            let engine_cfg = cfg.engine_config(&objective.kind);
            engine_cfg.validate().map_err(|e| e.to_string())?;
            let inst = Instance {
                declarations: st.declarations.clone(),
                assertions: st.assertions.clone(),
                objective: objective.clone(),
            };
            let result = solve_instance(&inst, &engine_cfg).map_err(|e| e.to_string())?;
            st.summary.smt_calls = Some(result.stats.smt_calls);
            st.summary.wall = Some(result.stats.wall);
            st.checked = Some(Checked::Optimized {
                objective: objective.clone(),
                result,
            });
            Ok(())
        }
        None => {
            let mut enc = Encoder::new();
            for (name, sort) in &st.declarations {
                enc.declare(name, *sort).map_err(|e| e.to_string())?;
            }
            for a in &st.assertions {
                enc.assert_term(a).map_err(|e| e.to_string())?;
            }
            let (sat, model) = match enc.solve(&[]) {
                SatResult::Sat(m) => {
                    let mut values = HashMap::new();
                    for (name, _) in enc.map().word_names() {
                        values.insert(
                            name.clone(),
                            ModelValue::Word(enc.map().pattern(&name, &m).unwrap()),
                        );
                    }
                    for (name, v) in enc.map().bool_names() {
                        values.insert(name, ModelValue::Bool(m.value(v)));
                    }
                    (true, Some(values))
                }
                SatResult::Unsat => (false, None),
            };
            st.summary.smt_calls = Some(enc.solve_calls());
            st.checked = Some(Checked::Plain { sat, model });
            Ok(())
        }
    }
}

fn format_word(sort: &Sort, bits: &[bool]) -> String {
    match sort {
        Sort::Fp(s) => FpBits::from_bits(*s, bits.to_vec())
            .expect("model pattern matches sort")
            .to_string(),
        _ => BvConst::from_bits(bits.to_vec())
            .expect("non-empty pattern")
            .to_string(),
    }
}

fn print_model(st: &Interp, out: &mut impl Write) -> Result<(), InterpError> {
    let model = match &st.checked {
        Some(Checked::Plain { model, .. }) => model.as_ref(),
        Some(Checked::Optimized { result, .. }) => result.model.as_ref(),
        None => None,
    };
    let Some(model) = model else {
        return Ok(());
    };
    writeln!(out, "(model")?;
    for (name, sort) in &st.declarations {
        match model.get(name) {
            Some(ModelValue::Bool(b)) => {
                writeln!(out, "  (define-fun {name} () Bool {b})")?;
            }
            Some(ModelValue::Word(bits)) => {
                writeln!(
                    out,
                    "  (define-fun {name} () {sort} {})",
                    format_word(sort, bits)
                )?;
            }
            None => {}
        }
    }
    writeln!(out, ")")?;
    Ok(())
}

fn print_objectives(st: &Interp, out: &mut impl Write) -> Result<(), InterpError> {
    let Some(Checked::Optimized { objective, result }) = &st.checked else {
        return Ok(());
    };
    if let Some(value) = &result.optimum {
        let marker = if result.partial { " :partial" } else { "" };
        writeln!(out, "(objectives ({} {value}{marker}))", objective.name)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::script::parse_script;
    use super::*;

    fn run(text: &str) -> String {
        run_cfg(text, &RunConfig::default())
    }

    fn run_cfg(text: &str, cfg: &RunConfig) -> String {
        let script = parse_script(text).expect("parse");
        let mut out = Vec::new();
        interpret(&script, cfg, &mut out).expect("interpret");
        String::from_utf8(out).unwrap()
    }

    #[test]
    fn worked_fp_minimization_end_to_end() {
        let text = "\
(declare-const c (_ FloatingPoint 3 5))
(assert (fp.geq c (fp #b0 #b110 #b1101)))
(minimize c)
(check-sat)
(get-objectives)
(get-model)
";
        let output = run(text);
        assert!(output.starts_with("sat\n"));
        assert!(output.contains("(objectives (c 29/2))"));
        assert!(output.contains("(define-fun c () (_ FloatingPoint 3 5) (fp #b0 #b110 #b1101))"));
    }

    #[test]
    fn plain_sat_check_without_objective() {
        let output = run(
            "(declare-const x (_ BitVec 3)) (assert (bvult x #b010)) (check-sat) (get-model)",
        );
        assert!(output.starts_with("sat\n"));
        assert!(output.contains("(define-fun x () (_ BitVec 3) #b00"));
    }

    #[test]
    fn unsat_scripts_print_no_objective_or_model() {
        let output = run(
            "(declare-const x (_ BitVec 2)) (assert (bvult x x)) (minimize x) (check-sat) (get-objectives) (get-model)",
        );
        assert_eq!(output, "unsat\n");
    }

    #[test]
    fn bv_objective_respects_signedness_attribute() {
        let unsigned = run(
            "(declare-const x (_ BitVec 3)) (minimize x) (check-sat) (get-objectives)",
        );
        assert!(unsigned.contains("(objectives (x 0))"));
        let signed = run(
            "(declare-const x (_ BitVec 3)) (minimize x :signed) (check-sat) (get-objectives)",
        );
        assert!(signed.contains("(objectives (x -4))"));
    }

    #[test]
    fn engine_choice_is_honored_and_checked() {
        let text = "\
(declare-const c (_ FloatingPoint 3 5))
(assert (fp.geq c (fp #b0 #b110 #b1101)))
(minimize c)
(check-sat)
(get-objectives)
";
        for engine in [EngineKind::OfpBs, EngineKind::OmtLinear, EngineKind::OmtBinary] {
            let cfg = RunConfig {
                engine: Some(engine),
                ..RunConfig::default()
            };
            let output = run_cfg(text, &cfg);
            assert!(output.contains("29/2"), "{engine:?}: {output}");
        }
        let cfg = RunConfig {
            engine: Some(EngineKind::ObvBs),
            ..RunConfig::default()
        };
        let script = parse_script(text).unwrap();
        let err = interpret(&script, &cfg, &mut Vec::new()).unwrap_err();
        assert!(err.to_string().contains("command 3"), "{err}");
    }

    #[test]
    fn nan_only_instances_report_a_nan_objective() {
        let output = run(
            "(declare-const c (_ FP 3 5)) (assert (fp.isNaN c)) (minimize c) (check-sat) (get-objectives)",
        );
        assert!(output.starts_with("sat\n"));
        assert!(output.contains("(objectives (c NaN))"));
    }

    #[test]
    fn get_objectives_before_check_prints_nothing() {
        let output = run("(declare-const x (_ BitVec 2)) (minimize x) (get-objectives)");
        assert_eq!(output, "");
    }
}
