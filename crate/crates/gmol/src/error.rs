//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by distribution, series, optimization and fitting code.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or iteration hit its cap before reaching the requested tolerance.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// A raw moment of the requested order does not exist for the given shape.
    #[error("moment of order {order} does not exist (requires order < tau = {tau})")]
    MomentUndefined { order: u32, tau: f64 },

    /// A finite value could not be produced (overflow, underflow, non-finite input).
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// A result left its representable range (e.g. survival underflowed to zero).
    #[error("range error: {0}")]
    Range(String),

    /// The optimizer could not build a usable starting simplex.
    #[error("initialization error: {0}")]
    Initialization(String),

    /// A dataset or design matrix violates its structural requirements.
    #[error("design error: {0}")]
    Design(String),

    /// Censoring-bound calibration failed to bracket the target.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// A model comparison is degenerate (e.g. zero-variance score differences).
    #[error("degenerate comparison: {0}")]
    Degenerate(String),

    /// Two fits that should be ordered by construction are not.
    #[error("optimizer inconsistency: {0}")]
    Inconsistent(String),

    /// An optimization run failed outright.
    #[error("non-convergence: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
