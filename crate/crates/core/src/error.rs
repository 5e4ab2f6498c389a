//! Error type shared by all modules.

use crate::schedules::ScheduleViolation;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} must be finite")]
    NonFinite { what: &'static str },

    #[error("invalid {name}: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("step index s={s} outside schedule domain (max {max})")]
    StepOutOfRange { s: usize, max: usize },

    #[error(transparent)]
    Schedule(#[from] ScheduleViolation),

    /// The objective or subgradient oracle produced a non-finite value.
    #[error("oracle failure at iteration {iteration}: non-finite {what}")]
    OracleFailure {
        iteration: usize,
        what: &'static str,
    },

    /// An averaging weight `eta^(-k)` or the running weight sum left the
    /// finite range (or stopped increasing).
    #[error(
        "averaging weight overflow at update {update} (k={k}): \
         use a smaller k or a shorter horizon"
    )]
    WeightOverflow { update: usize, k: f64 },

    #[error("invariant `{name}` violated at iteration {iteration}: lhs={lhs:e} rhs={rhs:e}")]
    InvariantViolation {
        name: &'static str,
        iteration: usize,
        lhs: f64,
        rhs: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {detail}")]
    Parse { line: usize, detail: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            detail: detail.into(),
        }
    }
}
