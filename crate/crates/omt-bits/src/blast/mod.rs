//! Formula AST and its Tseitin-style translation to CNF.
//!
//! `ast` defines the accepted QF BV/FP fragment together with a direct
//! semantic evaluator; `encode` lowers formulas onto the SAT solver,
//! keeping a stable map from every declared variable bit to a SAT
//! variable so objective bits can be assumed across incremental solves.

mod ast;
mod encode;

pub use ast::{eval_bool, eval_word, Assignment, EvalError, Sort, SortError, Term, TermKind};
pub use encode::{BlastError, BlastMap, Encoder, KeyTransform};
