//! Monadic second-order logic over set variables.

mod eval;
mod formula;
mod types;

pub use eval::{eval, eval_with, holds, Compiled, EvalOptions};
pub use formula::{fresh_name, Formula};
pub use types::{mtype, theory_equal, RankType, TypeContext, TypeOptions};
