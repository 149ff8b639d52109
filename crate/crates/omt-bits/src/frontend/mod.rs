//! SMT-LIB v2 frontend for the accepted QF BV/FP fragment, extended
//! with single-objective `minimize`/`maximize` commands. Parsing turns
//! text into a `Script`; interpretation executes it against the
//! configured engine.

mod interp;
mod script;
mod syntax;

pub use interp::{interpret, script_instance, InterpError, RunConfig, RunSummary};
pub use script::{parse_script, Command, Script};
pub use syntax::{Diag, Pos};
