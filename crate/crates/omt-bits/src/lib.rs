//! Optimization Modulo Theories for bit-vector and floating-point
//! objectives, bit-blasted onto an embedded incremental SAT solver.
//!
//! The solver finds models of quantifier-free BV/FP formulas that
//! minimize or maximize a designated objective variable. Four engines
//! are provided: attractor-guided bit-level search for bit-vectors
//! (`obv-bs`) and floating point (`ofp-bs`), plus linear- and
//! binary-search loops driven by improving cuts (`omt-lin`,
//! `omt-bin`). A brute-force oracle certifies optima at small sorts.
//!
//! Bit patterns are MSB-first everywhere: index 0 is the most
//! significant bit.

pub mod bitvec;
pub mod blast;
pub mod engines;
pub mod fp;
pub mod frontend;
pub mod oracle;
pub mod problem;
pub mod sat;
