//! Exact arithmetic on piecewise-polynomial matrix functions of time.
//!
//! Coefficients are arbitrary-precision rationals, so commutators,
//! integrals, and evaluations at rational times are exact: downstream
//! regressions against printed term matrices are equality tests, not
//! tolerance tests.

mod format;
mod matrix;
mod piecewise;
mod poly;
pub mod rational;

pub use format::{format_model, parse_model, ModelError};
pub use matrix::PolyMatrix;
pub use piecewise::PiecewisePolyMatrix;
pub use poly::Poly;
pub use rational::{format_rational, parse_rational, rat, rational_to_f64, Rational};

use thiserror::Error;

/// Default cap on any entry's polynomial degree; guards against runaway
/// memory in deep commutator recursions.
pub const DEFAULT_MAX_DEGREE: usize = 512;

#[derive(Debug, Error)]
pub enum PolymatError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("piecewise domains differ: [{left_lo}, {left_hi}] vs [{right_lo}, {right_hi}]")]
    DomainMismatch {
        left_lo: String,
        left_hi: String,
        right_lo: String,
        right_hi: String,
    },
    #[error("entry degree {degree} exceeds the configured limit {limit}")]
    DegreeOverflow { degree: usize, limit: usize },
    #[error("t = {t} outside the domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
    #[error("expected a constant matrix but entry ({row}, {col}) has degree {degree}")]
    NonConstant { row: usize, col: usize, degree: usize },
    #[error("invalid breakpoints: need m ≥ 1 segments with strictly increasing breakpoints")]
    InvalidBreakpoints,
}

pub type PolymatResult<T> = Result<T, PolymatError>;
