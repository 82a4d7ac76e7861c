//! Exact inference for chain energies built from suffix-pattern predicates.
//!
//! A [`Language`] is a set of predicates over a finite alphabet. An
//! [`Instance`] attaches weights to predicate windows on a chain of length
//! `n`. The solvers run dynamic programs over closures of the language
//! ordered by suffix inclusion; the [`oracle`] module provides independent
//! reference values.

mod bits;
pub mod closure;
pub mod domain;
pub mod error;
pub mod generators;
pub mod model;
pub mod oracle;
pub mod order;
pub mod predicate;
pub mod semiring;
pub mod solver;

pub use closure::{
    cap_bar_closure, prefix_closure, star_closure, star_closure_fixpoint, ClosedLanguage,
    ClosureConfig, ClosureKind, ClosureReport,
};
pub use domain::{Domain, Letter, LetterSet, Words};
pub use error::{Error, Result};
pub use model::{normalize_instance, Instance, Language};
pub use order::{build_hasse, check_hasse_bound, ge, HasseBound, HasseDiagram};
pub use predicate::Predicate;
pub use semiring::{
    LogSumExp, MinPlus, MinPlusExact, Selective, Semiring, SemiringKind, SumProduct,
};
pub use solver::{
    minimize_nonpositive, semiring_argmin, semiring_sum, NonPositivePlan, SolveResult, SolveStats,
    SumPlan,
};
