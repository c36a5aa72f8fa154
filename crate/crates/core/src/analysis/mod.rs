//! Simple extensions `Gamma<beta>`, iterated ψ-maps, and rank computations
//! over an ambient couple.

mod approx;
mod classifier;
mod iterate;

use thiserror::Error;

pub use approx::{best_approx_dagger, dagger_maximality_failures, span_rank, Base, LogSlice, Reduction, Span};
pub use classifier::{
    case_invariants, certify_key_interval, classify, key_interval_radius, CheckItem, CheckReport, ClassifierReport,
    Verdict, DEFAULT_MAX_STEPS,
};
pub use iterate::{component_key, in_domain, objective, psi_iter, psi_iterates, solve_monotone, Graded, PsiIterSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("{0} already lies in the span of Gamma")]
    BetaInSpan(String),
    #[error("not a sub-couple: {0}")]
    InvalidSubcouple(String),
    #[error("{0} has no best approximation from Gamma")]
    NoBestApproximation(String),
    #[error("dagger {0} lies in Gamma")]
    DaggerInBase(String),
    #[error("no positive element of strictly smaller class")]
    NoSmallerClassAvailable,
    #[error("{0}")]
    NotApplicable(String),
    #[error("an iterate needs at least one shift")]
    EmptyIterSpec,
    #[error("{shifts} shifts but {coeffs} coefficients")]
    LengthMismatch { shifts: usize, coeffs: usize },
    #[error("no solution for target {tau} among {classes} classes")]
    NoSolution { tau: String, classes: usize },
    #[error("several solutions: {0:?}")]
    NotUnique(Vec<String>),
}
