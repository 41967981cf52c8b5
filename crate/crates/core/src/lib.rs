//! Column subset selection: criteria, exact and heuristic selectors, and
//! the X3C reduction used to probe their hardness numerically.

pub mod criteria;
pub mod error;
pub mod matrix;
pub mod selectors;
pub mod verification;
pub mod x3c;

pub use criteria::{
    ConditionKind, CriterionKind, CriterionSpec, CriterionValue, Direction, ResidualNorm, SchattenP,
};
pub use error::{Error, Result};
pub use matrix::{DenseMatrix, PartitionedPinv, SvdResult};
pub use selectors::{
    decide, decide_with, select_exact, select_exact_with, select_greedy_forward,
    select_greedy_frobenius, select_local_swap_volume, ColumnSubset, Decision, DecisionQuery,
    ExactOptions, Method, SelectionResult,
};
pub use verification::{check_removal_monotonicity, run_suite, LemmaReport, SuiteConfig};
pub use x3c::{gadget, reduce, GapReport, ReductionMatrix, X3CInstance};
