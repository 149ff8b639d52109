//! Script-level parsing: commands, sorts, and terms, with macro
//! expansion, let-bindings, and objective normalization (a non-variable
//! objective gets a fresh variable constrained to equal it).

use super::syntax::{parse_sexprs, Diag, Pos, SExpr};
use crate::bitvec::{BvConst, BvSort, Direction};
use crate::blast::{Sort, Term, TermKind};
use crate::fp::{self, FpBits, FpSort};
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    SetLogic(String),
    SetOption(String, String),
    SetInfo(String, String),
    DeclareConst(String, Sort),
    DefineFun {
        name: String,
        params: Vec<(String, Sort)>,
        ret: Sort,
        body: Term,
    },
    Assert(Term),
    /// Post-normalization the term is always a declared variable.
    Objective {
        term: Term,
        direction: Direction,
        signed: bool,
    },
    CheckSat,
    GetModel,
    GetObjectives,
    Exit,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Script {
    pub commands: Vec<Command>,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::SetLogic(l) => write!(f, "(set-logic {l})"),
            Command::SetOption(k, v) => write!(f, "(set-option :{k} {v})"),
            Command::SetInfo(k, v) => write!(f, "(set-info :{k} \"{}\")", v.replace('"', "\"\"")),
            Command::DeclareConst(n, s) => write!(f, "(declare-const {n} {s})"),
            Command::DefineFun {
                name,
                params,
                ret,
                body,
            } => {
                write!(f, "(define-fun {name} (")?;
                for (i, (p, s)) in params.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "({p} {s})")?;
                }
                write!(f, ") {ret} {body})")
            }
            Command::Assert(t) => write!(f, "(assert {t})"),
            Command::Objective {
                term,
                direction,
                signed,
            } => {
                let head = match direction {
                    Direction::Minimize => "minimize",
                    Direction::Maximize => "maximize",
                };
                if *signed {
                    write!(f, "({head} {term} :signed)")
                } else {
                    write!(f, "({head} {term})")
                }
            }
            Command::CheckSat => write!(f, "(check-sat)"),
            Command::GetModel => write!(f, "(get-model)"),
            Command::GetObjectives => write!(f, "(get-objectives)"),
            Command::Exit => write!(f, "(exit)"),
        }
    }
}

// one command per line keeps diffs and golden files readable
impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.commands {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Clone)]
struct MacroDef {
    params: Vec<(String, Sort)>,
    body: Term,
}

#[derive(Default)]
struct ParseCtx {
    globals: HashMap<String, Sort>,
    macros: HashMap<String, MacroDef>,
    commands: Vec<Command>,
    has_objective: bool,
    saw_exit: bool,
}

pub fn parse_script(text: &str) -> Result<Script, Diag> {
    let exprs = parse_sexprs(text)?;
    let mut ctx = ParseCtx::default();
    for e in exprs {
        if ctx.saw_exit {
            break;
        }
        command(&mut ctx, &e)?;
    }
    Ok(Script {
        commands: ctx.commands,
    })
}

fn err(pos: Pos, msg: impl Into<String>) -> Diag {
    Diag::new(pos, msg)
}

fn symbol<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, Diag> {
    e.atom()
        .ok_or_else(|| err(e.pos(), format!("expected {what}")))
}

fn keyword<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, Diag> {
    let s = symbol(e, what)?;
    s.strip_prefix(':')
        .ok_or_else(|| err(e.pos(), format!("expected {what} (a :keyword)")))
}

fn numeral(e: &SExpr, what: &str) -> Result<u64, Diag> {
    symbol(e, what)?
        .parse::<u64>()
        .map_err(|_| err(e.pos(), format!("expected {what} (a numeral)")))
}

fn command(ctx: &mut ParseCtx, e: &SExpr) -> Result<(), Diag> {
    let items = e
        .list()
        .ok_or_else(|| err(e.pos(), "expected a command (a parenthesized list)"))?;
    let head = items
        .first()
        .ok_or_else(|| err(e.pos(), "empty command"))?;
    let name = symbol(head, "a command name")?;
    match name {
        "set-logic" => {
            let [_, logic] = items else {
                return Err(err(e.pos(), "set-logic takes one symbol"));
            };
            ctx.commands
                .push(Command::SetLogic(symbol(logic, "a logic name")?.to_string()));
        }
        "set-option" => {
            let [_, key, value] = items else {
                return Err(err(e.pos(), "set-option takes a keyword and a value"));
            };
            let k = keyword(key, "an option name")?;
            let v = match value {
                SExpr::Atom(s, _) => s.clone(),
                SExpr::Str(s, _) => s.clone(),
                SExpr::List(..) => return Err(err(value.pos(), "expected an atomic value")),
            };
            ctx.commands.push(Command::SetOption(k.to_string(), v));
        }
        "set-info" => {
            let [_, key, value] = items else {
                return Err(err(e.pos(), "set-info takes a keyword and a value"));
            };
            let k = keyword(key, "an info name")?;
            let v = match value {
                SExpr::Atom(s, _) => s.clone(),
                SExpr::Str(s, _) => s.clone(),
                SExpr::List(..) => return Err(err(value.pos(), "expected an atomic value")),
            };
            ctx.commands.push(Command::SetInfo(k.to_string(), v));
        }
        "declare-const" => {
            let [_, n, s] = items else {
                return Err(err(e.pos(), "declare-const takes a name and a sort"));
            };
            declare(ctx, symbol(n, "a variable name")?, sort(s)?, n.pos())?;
        }
        "declare-fun" => {
            let [_, n, params, s] = items else {
                return Err(err(e.pos(), "declare-fun takes a name, parameters, and a sort"));
            };
            let plist = params
                .list()
                .ok_or_else(|| err(params.pos(), "expected a parameter list"))?;
            if !plist.is_empty() {
                return Err(err(
                    params.pos(),
                    "only 0-ary declare-fun (constants) is supported",
                ));
            }
            declare(ctx, symbol(n, "a function name")?, sort(s)?, n.pos())?;
        }
        "define-fun" => {
            let [_, n, params, ret, body] = items else {
                return Err(err(
                    e.pos(),
                    "define-fun takes a name, parameters, a sort, and a body",
                ));
            };
            let fname = symbol(n, "a function name")?;
            if ctx.globals.contains_key(fname) || ctx.macros.contains_key(fname) {
                return Err(err(n.pos(), format!("`{fname}` is already defined")));
            }
            let plist = params
                .list()
                .ok_or_else(|| err(params.pos(), "expected a parameter list"))?;
            let mut sig = Vec::new();
            let mut locals = HashMap::new();
            for p in plist {
                let pair = p
                    .list()
                    .ok_or_else(|| err(p.pos(), "expected (name sort)"))?;
                let [pn, ps] = pair else {
                    return Err(err(p.pos(), "expected (name sort)"));
                };
                let pname = symbol(pn, "a parameter name")?;
                let psort = sort(ps)?;
                locals.insert(pname.to_string(), var_term(pname, psort));
                sig.push((pname.to_string(), psort));
            }
            let rsort = sort(ret)?;
            let b = term(ctx, body, &locals)?;
            if b.sort() != rsort {
                return Err(err(
                    body.pos(),
                    format!("body has sort {}, declared {}", b.sort(), rsort),
                ));
            }
            ctx.macros.insert(
                fname.to_string(),
                MacroDef {
                    params: sig.clone(),
                    body: b.clone(),
                },
            );
            ctx.commands.push(Command::DefineFun {
                name: fname.to_string(),
                params: sig,
                ret: rsort,
                body: b,
            });
        }
        "assert" => {
            let [_, t] = items else {
                return Err(err(e.pos(), "assert takes one term"));
            };
            let parsed = term(ctx, t, &HashMap::new())?;
            if parsed.sort() != Sort::Bool {
                return Err(err(
                    t.pos(),
                    format!("asserted term has sort {}, expected Bool", parsed.sort()),
                ));
            }
            ctx.commands.push(Command::Assert(parsed));
        }
        "minimize" | "maximize" => {
            objective_command(ctx, e, items, name == "minimize")?;
        }
        "check-sat" => ctx.commands.push(Command::CheckSat),
        "get-model" => ctx.commands.push(Command::GetModel),
        "get-objectives" => ctx.commands.push(Command::GetObjectives),
        "exit" => {
            ctx.commands.push(Command::Exit);
            ctx.saw_exit = true;
        }
        other => {
            return Err(err(head.pos(), format!("unknown command `{other}`")));
        }
    }
    Ok(())
}

fn declare(ctx: &mut ParseCtx, name: &str, s: Sort, pos: Pos) -> Result<(), Diag> {
    if ctx.globals.contains_key(name) || ctx.macros.contains_key(name) {
        return Err(err(pos, format!("`{name}` is already declared")));
    }
    ctx.globals.insert(name.to_string(), s);
    ctx.commands.push(Command::DeclareConst(name.to_string(), s));
    Ok(())
}

fn objective_command(
    ctx: &mut ParseCtx,
    e: &SExpr,
    items: &[SExpr],
    minimize: bool,
) -> Result<(), Diag> {
    if ctx.has_objective {
        return Err(err(e.pos(), "only one objective per script is supported"));
    }
    let (t, signed) = match items {
        [_, t] => (t, false),
        [_, t, attr] if attr.atom() == Some(":signed") => (t, true),
        _ => {
            return Err(err(
                e.pos(),
                "expected (minimize <term>) or (minimize <term> :signed)",
            ))
        }
    };
    let parsed = term(ctx, t, &HashMap::new())?;
    match parsed.sort() {
        Sort::BitVec(_) => {}
        Sort::Fp(_) => {
            if signed {
                return Err(err(
                    t.pos(),
                    ":signed only applies to bit-vector objectives",
                ));
            }
        }
        Sort::Bool => {
            return Err(err(t.pos(), "objective must be a bit-vector or FP term"));
        }
    }
    let direction = if minimize {
        Direction::Minimize
    } else {
        Direction::Maximize
    };
    // normalize: a compound objective becomes a fresh constrained variable
    let var = if parsed.var_name().is_some() && ctx.globals.contains_key(parsed.var_name().unwrap())
    {
        parsed
    } else {
        let mut fresh = "cost".to_string();
        let mut k = 0;
        while ctx.globals.contains_key(&fresh) || ctx.macros.contains_key(&fresh) {
            fresh = format!("cost!{k}");
            k += 1;
        }
        declare(ctx, &fresh, parsed.sort(), e.pos())?;
        let v = var_term(&fresh, parsed.sort());
        ctx.commands.push(Command::Assert(
            Term::eq(v.clone(), parsed).expect("same sort by construction"),
        ));
        v
    };
    ctx.has_objective = true;
    ctx.commands.push(Command::Objective {
        term: var,
        direction,
        signed,
    });
    Ok(())
}

fn var_term(name: &str, s: Sort) -> Term {
    match s {
        Sort::Bool => Term::bool_var(name),
        Sort::BitVec(b) => Term::bv_var(name, b),
        Sort::Fp(f) => Term::fp_var(name, f),
    }
}

fn sort(e: &SExpr) -> Result<Sort, Diag> {
    if let Some(name) = e.atom() {
        return match name {
            "Bool" => Ok(Sort::Bool),
            "Float16" => Ok(Sort::Fp(FpSort::new(5, 11).unwrap())),
            "Float32" => Ok(Sort::Fp(FpSort::new(8, 24).unwrap())),
            "Float64" => Ok(Sort::Fp(FpSort::new(11, 53).unwrap())),
            "Float128" => Ok(Sort::Fp(FpSort::new(15, 113).unwrap())),
            _ => Err(err(e.pos(), format!("unknown sort `{name}`"))),
        };
    }
    let items = e.list().unwrap();
    let heads: Vec<Option<&str>> = items.iter().take(2).map(|x| x.atom()).collect();
    match heads.as_slice() {
        [Some("_"), Some("BitVec")] => {
            let [_, _, w] = items else {
                return Err(err(e.pos(), "expected (_ BitVec <width>)"));
            };
            let width = numeral(w, "a width")?;
            if width == 0 || width > 4096 {
                return Err(err(w.pos(), "bit-vector width must be in 1..=4096"));
            }
            Ok(Sort::BitVec(BvSort::new(width as usize).unwrap()))
        }
        [Some("_"), Some("FloatingPoint" | "FP")] => {
            let [_, _, eb, sb] = items else {
                return Err(err(e.pos(), "expected (_ FloatingPoint <ebits> <sbits>)"));
            };
            let ebits = numeral(eb, "exponent bits")?;
            let sbits = numeral(sb, "significand bits")?;
            if !(2..=20).contains(&ebits) || !(2..=200).contains(&sbits) {
                return Err(err(
                    e.pos(),
                    "supported FP sorts have ebits in 2..=20 and sbits in 2..=200",
                ));
            }
            Ok(Sort::Fp(FpSort::new(ebits as u32, sbits as u32).unwrap()))
        }
        _ => Err(err(e.pos(), "unknown sort")),
    }
}

/// Operators accepted by SMT-LIB but outside this solver's fragment;
/// named explicitly for a clear diagnostic.
const KNOWN_UNSUPPORTED: &[&str] = &[
    "fp.add",
    "fp.sub",
    "fp.mul",
    "fp.div",
    "fp.sqrt",
    "fp.rem",
    "fp.fma",
    "fp.roundToIntegral",
    "fp.to_real",
    "fp.to_sbv",
    "fp.to_ubv",
    "to_fp",
    "bvudiv",
    "bvurem",
    "bvsdiv",
    "bvsrem",
    "bvsmod",
    "bvashr",
    "forall",
    "exists",
];

fn term(ctx: &ParseCtx, e: &SExpr, locals: &HashMap<String, Term>) -> Result<Term, Diag> {
    match e {
        SExpr::Str(_, p) => Err(err(*p, "string literals are not terms")),
        SExpr::Atom(a, p) => atom_term(ctx, a, *p, locals),
        SExpr::List(items, p) => {
            let head = items.first().ok_or_else(|| err(*p, "empty term"))?;
            match head {
                SExpr::List(..) => indexed_application(ctx, e, items, locals),
                SExpr::Atom(name, hp) => {
                    apply(ctx, e, name, *hp, &items[1..], locals)
                }
                SExpr::Str(_, sp) => Err(err(*sp, "string literals are not operators")),
            }
        }
    }
}

fn atom_term(
    ctx: &ParseCtx,
    a: &str,
    p: Pos,
    locals: &HashMap<String, Term>,
) -> Result<Term, Diag> {
    if a == "true" {
        return Ok(Term::truth(true));
    }
    if a == "false" {
        return Ok(Term::truth(false));
    }
    if a.starts_with("#b") || a.starts_with("#x") {
        return BvConst::parse(a)
            .map(Term::bv_lit)
            .map_err(|e| err(p, e.to_string()));
    }
    if let Some(t) = locals.get(a) {
        return Ok(t.clone());
    }
    if let Some(&s) = ctx.globals.get(a) {
        return Ok(var_term(a, s));
    }
    if let Some(m) = ctx.macros.get(a) {
        if m.params.is_empty() {
            return Ok(m.body.clone());
        }
        return Err(err(p, format!("macro `{a}` expects {} arguments", m.params.len())));
    }
    if a.chars().all(|c| c.is_ascii_digit()) {
        return Err(err(
            p,
            "plain numerals have no sort here; use #b/#x or (_ bvN width)",
        ));
    }
    Err(err(p, format!("unknown symbol `{a}`")))
}

/// Applications headed by a list: `((_ extract i j) t)` and friends.
fn indexed_application(
    ctx: &ParseCtx,
    e: &SExpr,
    items: &[SExpr],
    locals: &HashMap<String, Term>,
) -> Result<Term, Diag> {
    let head = items[0].list().unwrap();
    let tags: Vec<Option<&str>> = head.iter().take(2).map(|x| x.atom()).collect();
    match tags.as_slice() {
        [Some("_"), Some("extract")] => {
            let [_, hi, lo] = head else {
                return Err(err(items[0].pos(), "expected (_ extract <hi> <lo>)"));
            };
            let [_, arg] = items else {
                return Err(err(e.pos(), "extract takes one operand"));
            };
            let t = term(ctx, arg, locals)?;
            Term::new(TermKind::Extract {
                hi: numeral(hi, "high index")? as u32,
                lo: numeral(lo, "low index")? as u32,
                arg: t,
            })
            .map_err(|se| err(e.pos(), se.to_string()))
        }
        _ => term(ctx, &items[0], locals).and_then(|_| {
            Err(err(e.pos(), "only (_ extract i j) may head an application"))
        }),
    }
}

fn apply(
    ctx: &ParseCtx,
    e: &SExpr,
    name: &str,
    head_pos: Pos,
    args: &[SExpr],
    locals: &HashMap<String, Term>,
) -> Result<Term, Diag> {
    use TermKind::*;
    let pos = e.pos();
    let sort_err = |se: crate::blast::SortError| err(pos, se.to_string());

    // indexed constants: (_ bvN w), (_ +oo e s), ...
    if name == "_" {
        return indexed_constant(e, args);
    }
    if name == "fp" {
        return fp_literal(e, args);
    }
    if KNOWN_UNSUPPORTED.contains(&name) {
        return Err(err(head_pos, format!("unsupported operator `{name}`")));
    }
    if name == "let" {
        let [bindings, body] = args else {
            return Err(err(pos, "let takes bindings and a body"));
        };
        let blist = bindings
            .list()
            .ok_or_else(|| err(bindings.pos(), "expected a binding list"))?;
        let mut extended = locals.clone();
        let mut batch = Vec::new();
        for b in blist {
            let pair = b.list().ok_or_else(|| err(b.pos(), "expected (name term)"))?;
            let [n, t] = pair else {
                return Err(err(b.pos(), "expected (name term)"));
            };
            // bindings are parallel: evaluate in the outer scope
            batch.push((symbol(n, "a binding name")?.to_string(), term(ctx, t, locals)?));
        }
        extended.extend(batch);
        return term(ctx, body, &extended);
    }

    let sub = |i: usize| term(ctx, &args[i], locals);
    let n = args.len();
    let need = |k: usize| -> Result<(), Diag> {
        if n == k {
            Ok(())
        } else {
            Err(err(pos, format!("`{name}` takes {k} arguments, got {n}")))
        }
    };
    let at_least = |k: usize| -> Result<(), Diag> {
        if n >= k {
            Ok(())
        } else {
            Err(err(pos, format!("`{name}` needs at least {k} arguments")))
        }
    };

    let left_fold = |ctx: &ParseCtx, mk: fn(Term, Term) -> TermKind| -> Result<Term, Diag> {
        let mut acc = term(ctx, &args[0], locals)?;
        for a in &args[1..] {
            acc = Term::new(mk(acc, term(ctx, a, locals)?)).map_err(sort_err)?;
        }
        Ok(acc)
    };

    match name {
        "not" => {
            need(1)?;
            Term::new(Not(sub(0)?)).map_err(sort_err)
        }
        "and" => {
            at_least(1)?;
            let ts = args
                .iter()
                .map(|a| term(ctx, a, locals))
                .collect::<Result<Vec<_>, _>>()?;
            Term::new(And(ts)).map_err(sort_err)
        }
        "or" => {
            at_least(1)?;
            let ts = args
                .iter()
                .map(|a| term(ctx, a, locals))
                .collect::<Result<Vec<_>, _>>()?;
            Term::new(Or(ts)).map_err(sort_err)
        }
        "xor" => {
            at_least(2)?;
            left_fold(ctx, Xor)
        }
        "=>" => {
            at_least(2)?;
            // right-associative
            let mut ts = args
                .iter()
                .map(|a| term(ctx, a, locals))
                .collect::<Result<Vec<_>, _>>()?;
            let mut acc = ts.pop().unwrap();
            while let Some(lhs) = ts.pop() {
                acc = Term::new(Implies(lhs, acc)).map_err(sort_err)?;
            }
            Ok(acc)
        }
        "=" => {
            at_least(2)?;
            let ts = args
                .iter()
                .map(|a| term(ctx, a, locals))
                .collect::<Result<Vec<_>, _>>()?;
            let mut eqs = Vec::new();
            for w in ts.windows(2) {
                eqs.push(Term::eq(w[0].clone(), w[1].clone()).map_err(sort_err)?);
            }
            Ok(if eqs.len() == 1 {
                eqs.pop().unwrap()
            } else {
                Term::and(eqs)
            })
        }
        "distinct" => {
            at_least(2)?;
            let ts = args
                .iter()
                .map(|a| term(ctx, a, locals))
                .collect::<Result<Vec<_>, _>>()?;
            let mut neqs = Vec::new();
            for i in 0..ts.len() {
                for j in i + 1..ts.len() {
                    neqs.push(Term::negate(
                        Term::eq(ts[i].clone(), ts[j].clone()).map_err(sort_err)?,
                    ));
                }
            }
            Ok(if neqs.len() == 1 {
                neqs.pop().unwrap()
            } else {
                Term::and(neqs)
            })
        }
        "ite" => {
            need(3)?;
            Term::new(Ite(sub(0)?, sub(1)?, sub(2)?)).map_err(sort_err)
        }
        "bvnot" => {
            need(1)?;
            Term::new(BvNot(sub(0)?)).map_err(sort_err)
        }
        "bvneg" => {
            need(1)?;
            let x = sub(0)?;
            let w = match x.sort() {
                Sort::BitVec(s) => s.width(),
                _ => return Err(err(pos, "bvneg needs a bit-vector")),
            };
            let mut one = vec![false; w];
            one[w - 1] = true;
            let one = Term::bv_lit(BvConst::from_bits(one).unwrap());
            let inv = Term::new(BvNot(x)).map_err(sort_err)?;
            Term::new(BvAdd(inv, one)).map_err(sort_err)
        }
        "bvand" => {
            at_least(2)?;
            left_fold(ctx, BvAnd)
        }
        "bvor" => {
            at_least(2)?;
            left_fold(ctx, BvOr)
        }
        "bvxor" => {
            at_least(2)?;
            left_fold(ctx, BvXor)
        }
        "bvxnor" => {
            need(2)?;
            Term::new(BvNxor(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "bvadd" => {
            at_least(2)?;
            left_fold(ctx, BvAdd)
        }
        "bvmul" => {
            at_least(2)?;
            left_fold(ctx, BvMul)
        }
        "bvsub" => {
            need(2)?;
            let a = sub(0)?;
            let b = sub(1)?;
            let w = match b.sort() {
                Sort::BitVec(s) => s.width(),
                _ => return Err(err(pos, "bvsub needs bit-vectors")),
            };
            let mut one = vec![false; w];
            one[w - 1] = true;
            let one = Term::bv_lit(BvConst::from_bits(one).unwrap());
            let neg =
                Term::new(BvAdd(Term::new(BvNot(b)).map_err(sort_err)?, one)).map_err(sort_err)?;
            Term::new(BvAdd(a, neg)).map_err(sort_err)
        }
        "bvshl" => {
            need(2)?;
            Term::new(BvShl(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "bvlshr" => {
            need(2)?;
            Term::new(BvLshr(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "concat" => {
            at_least(2)?;
            left_fold(ctx, Concat)
        }
        "bvult" => {
            need(2)?;
            Term::new(BvUlt(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "bvule" => {
            need(2)?;
            Term::new(BvUle(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "bvugt" => {
            need(2)?;
            Term::new(BvUgt(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "bvuge" => {
            need(2)?;
            Term::new(BvUge(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "bvslt" => {
            need(2)?;
            Term::new(BvSlt(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "bvsle" => {
            need(2)?;
            Term::new(BvSle(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "bvsgt" => {
            need(2)?;
            Term::new(BvSgt(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "bvsge" => {
            need(2)?;
            Term::new(BvSge(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "fp.eq" => {
            need(2)?;
            Term::new(FpEq(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "fp.lt" => {
            need(2)?;
            Term::new(FpLt(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "fp.leq" => {
            need(2)?;
            Term::new(FpLeq(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "fp.gt" => {
            need(2)?;
            Term::new(FpGt(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "fp.geq" => {
            need(2)?;
            Term::new(FpGeq(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "fp.isNaN" => {
            need(1)?;
            Term::new(FpIsNan(sub(0)?)).map_err(sort_err)
        }
        "fp.isInfinite" => {
            need(1)?;
            Term::new(FpIsInf(sub(0)?)).map_err(sort_err)
        }
        "fp.isZero" => {
            need(1)?;
            Term::new(FpIsZero(sub(0)?)).map_err(sort_err)
        }
        "fp.isNormal" => {
            need(1)?;
            Term::new(FpIsNormal(sub(0)?)).map_err(sort_err)
        }
        "fp.isSubnormal" => {
            need(1)?;
            Term::new(FpIsSubnormal(sub(0)?)).map_err(sort_err)
        }
        "fp.isNegative" => {
            need(1)?;
            Term::new(FpIsNegative(sub(0)?)).map_err(sort_err)
        }
        "fp.isPositive" => {
            need(1)?;
            Term::new(FpIsPositive(sub(0)?)).map_err(sort_err)
        }
        "fp.neg" => {
            need(1)?;
            Term::new(FpNeg(sub(0)?)).map_err(sort_err)
        }
        "fp.abs" => {
            need(1)?;
            Term::new(FpAbs(sub(0)?)).map_err(sort_err)
        }
        "fp.min" => {
            need(2)?;
            Term::new(FpMin(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        "fp.max" => {
            need(2)?;
            Term::new(FpMax(sub(0)?, sub(1)?)).map_err(sort_err)
        }
        _ => {
            // user macro application
            if let Some(m) = ctx.macros.get(name).cloned() {
                if m.params.len() != n {
                    return Err(err(
                        pos,
                        format!("macro `{name}` expects {} arguments, got {n}", m.params.len()),
                    ));
                }
                let mut binding = HashMap::new();
                for ((pname, psort), a) in m.params.iter().zip(args) {
                    let arg = term(ctx, a, locals)?;
                    if arg.sort() != *psort {
                        return Err(err(
                            a.pos(),
                            format!("argument has sort {}, expected {psort}", arg.sort()),
                        ));
                    }
                    binding.insert(pname.clone(), arg);
                }
                return substitute(&m.body, &binding).map_err(|se| err(pos, se.to_string()));
            }
            Err(err(head_pos, format!("unknown operator `{name}`")))
        }
    }
}

fn indexed_constant(e: &SExpr, args: &[SExpr]) -> Result<Term, Diag> {
    let pos = e.pos();
    let head = args
        .first()
        .and_then(|a| a.atom())
        .ok_or_else(|| err(pos, "expected an indexed identifier"))?;
    if let Some(digits) = head.strip_prefix("bv") {
        let [_, w] = args else {
            return Err(err(pos, "expected (_ bvN <width>)"));
        };
        let value: num::BigUint = digits
            .parse()
            .map_err(|_| err(pos, "expected (_ bvN <width>) with numeric N"))?;
        let width = numeral(w, "a width")? as usize;
        if width == 0 || width > 4096 {
            return Err(err(w.pos(), "bit-vector width must be in 1..=4096"));
        }
        let sort = BvSort::new(width).unwrap();
        return Ok(Term::bv_lit(BvConst::from_biguint(sort, &value)));
    }
    match head {
        "+oo" | "-oo" | "+zero" | "-zero" | "NaN" => {
            let [_, eb, sb] = args else {
                return Err(err(pos, format!("expected (_ {head} <ebits> <sbits>)")));
            };
            let ebits = numeral(eb, "exponent bits")?;
            let sbits = numeral(sb, "significand bits")?;
            let sort = FpSort::new(ebits as u32, sbits as u32)
                .map_err(|fe| err(pos, fe.to_string()))?;
            let bits = match head {
                "+oo" => FpBits::positive_infinity(sort),
                "-oo" => FpBits::negative_infinity(sort),
                "+zero" => FpBits::positive_zero(sort),
                "-zero" => FpBits::negative_zero(sort),
                _ => fp::canonical_nan(sort),
            };
            Ok(Term::fp_lit(bits))
        }
        other => Err(err(pos, format!("unknown indexed identifier `{other}`"))),
    }
}

fn fp_literal(e: &SExpr, args: &[SExpr]) -> Result<Term, Diag> {
    let pos = e.pos();
    let [s, ex, sig] = args else {
        return Err(err(pos, "expected (fp <sign> <exponent> <significand>)"));
    };
    let field = |x: &SExpr, what: &str| -> Result<BvConst, Diag> {
        let a = x
            .atom()
            .ok_or_else(|| err(x.pos(), format!("expected a #b literal for the {what}")))?;
        BvConst::parse(a).map_err(|be| err(x.pos(), be.to_string()))
    };
    let sign = field(s, "sign")?;
    let exp = field(ex, "exponent")?;
    let frac = field(sig, "significand")?;
    if sign.width() != 1 {
        return Err(err(s.pos(), "sign field must be one bit"));
    }
    let sort = FpSort::new(exp.width() as u32, frac.width() as u32 + 1)
        .map_err(|fe| err(pos, fe.to_string()))?;
    let mut bits = sign.bits().to_vec();
    bits.extend_from_slice(exp.bits());
    bits.extend_from_slice(frac.bits());
    Ok(Term::fp_lit(
        FpBits::from_bits(sort, bits).expect("widths add up"),
    ))
}

/// Rebuilds a term with variables replaced by bound terms (macro body
/// instantiation). Sorts are rechecked on the way up.
fn substitute(t: &Term, binding: &HashMap<String, Term>) -> Result<Term, crate::blast::SortError> {
    use TermKind::*;
    if let Some(name) = t.var_name() {
        if let Some(replacement) = binding.get(name) {
            return Ok(replacement.clone());
        }
        return Ok(t.clone());
    }
    let s = |x: &Term| substitute(x, binding);
    let kind = match t.kind() {
        True | False | BvLit(_) | FpLit(_) | BoolVar(_) | BvVar(..) | FpVar(..) => {
            return Ok(t.clone())
        }
        Not(a) => Not(s(a)?),
        And(ts) => And(ts.iter().map(s).collect::<Result<_, _>>()?),
        Or(ts) => Or(ts.iter().map(s).collect::<Result<_, _>>()?),
        Xor(a, b) => Xor(s(a)?, s(b)?),
        Implies(a, b) => Implies(s(a)?, s(b)?),
        Eq(a, b) => Eq(s(a)?, s(b)?),
        Ite(c, a, b) => Ite(s(c)?, s(a)?, s(b)?),
        BvNot(a) => BvNot(s(a)?),
        BvAnd(a, b) => BvAnd(s(a)?, s(b)?),
        BvOr(a, b) => BvOr(s(a)?, s(b)?),
        BvXor(a, b) => BvXor(s(a)?, s(b)?),
        BvNxor(a, b) => BvNxor(s(a)?, s(b)?),
        BvAdd(a, b) => BvAdd(s(a)?, s(b)?),
        BvMul(a, b) => BvMul(s(a)?, s(b)?),
        BvShl(a, b) => BvShl(s(a)?, s(b)?),
        BvLshr(a, b) => BvLshr(s(a)?, s(b)?),
        Concat(a, b) => Concat(s(a)?, s(b)?),
        Extract { hi, lo, arg } => Extract {
            hi: *hi,
            lo: *lo,
            arg: s(arg)?,
        },
        BvUlt(a, b) => BvUlt(s(a)?, s(b)?),
        BvUle(a, b) => BvUle(s(a)?, s(b)?),
        BvUgt(a, b) => BvUgt(s(a)?, s(b)?),
        BvUge(a, b) => BvUge(s(a)?, s(b)?),
        BvSlt(a, b) => BvSlt(s(a)?, s(b)?),
        BvSle(a, b) => BvSle(s(a)?, s(b)?),
        BvSgt(a, b) => BvSgt(s(a)?, s(b)?),
        BvSge(a, b) => BvSge(s(a)?, s(b)?),
        FpEq(a, b) => FpEq(s(a)?, s(b)?),
        FpLt(a, b) => FpLt(s(a)?, s(b)?),
        FpLeq(a, b) => FpLeq(s(a)?, s(b)?),
        FpGt(a, b) => FpGt(s(a)?, s(b)?),
        FpGeq(a, b) => FpGeq(s(a)?, s(b)?),
        FpIsNan(a) => FpIsNan(s(a)?),
        FpIsInf(a) => FpIsInf(s(a)?),
        FpIsZero(a) => FpIsZero(s(a)?),
        FpIsNormal(a) => FpIsNormal(s(a)?),
        FpIsSubnormal(a) => FpIsSubnormal(s(a)?),
        FpIsNegative(a) => FpIsNegative(s(a)?),
        FpIsPositive(a) => FpIsPositive(s(a)?),
        FpNeg(a) => FpNeg(s(a)?),
        FpAbs(a) => FpAbs(s(a)?),
        FpMin(a, b) => FpMin(s(a)?, s(b)?),
        FpMax(a, b) => FpMax(s(a)?, s(b)?),
    };
    Term::new(kind)
}
