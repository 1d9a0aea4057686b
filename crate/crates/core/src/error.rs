use thiserror::Error;

/// Errors raised by evaluation, verification and quadrature routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point lies in the singular set: {0}")]
    SingularPoint(String),

    #[error("degenerate gradient (|grad| = {norm:e} below margin {margin:e})")]
    DegenerateGradient { norm: f64, margin: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("evaluation at the pole")]
    PolePoint,

    #[error("quadrature budget exceeded: {points} points > {budget}")]
    BudgetExceeded { points: u128, budget: u128 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
