//! LTL-without-X: formulas, direct lasso semantics, Büchi translation and
//! fair model checking.

pub mod buchi;
pub mod check;
pub mod eval;
pub mod formula;

pub use buchi::{to_buchi, GeneralizedBuchi, NnfArena};
pub use check::{check_fair, exists_fair_path, Lasso, Verdict};
pub use eval::{eval_lasso, eval_prefix, LassoWord, UnknownAtom};
pub use formula::{parse_formula, Formula, ParseError};
