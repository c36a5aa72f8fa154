//! Concrete Hahn-type couples.
//!
//! * [`LogModel`]: the value group ΓL of the logarithmic monomials
//!   `x^q0 * l1^q1 * ...`, with closed-form ψ and total integration.
//! * [`GapLogModel`]: ΓL with its gap `lambda` adjoined, and the two
//!   couples obtained by removing that gap again.
//! * [`ShiftedLogModel`]: ΓL with ψ shifted by a constant.
//! * [`TransModel`]: transmonomials of bounded exponential height.

mod log;
mod trans;

use thiserror::Error;

pub use log::{
    sigma, GapCut, GapLogElement, GapLogModel, GapRemovedElement, GapRemovedModel, LogElement, LogModel,
    ShiftedLogModel,
};
pub use trans::{Monomial, Series, TransModel, HEIGHT_BOUND};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TModelError {
    #[error("no asymptotic integral of {0}")]
    IntegrationGap(String),
    #[error("exponential height {0} exceeds the bound {HEIGHT_BOUND}")]
    HeightExceeded(usize),
    #[error("logarithmic derivative of {0} vanishes")]
    ZeroDagger(String),
    #[error("exp argument `{0}` is not purely large")]
    NotPurelyLarge(String),
    #[error("parse error: {0}")]
    Parse(String),
}
