use thiserror::Error;

/// Errors produced by the solver and its supporting routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZapError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The appended row lies (numerically) in the span of the existing rows.
    #[error("degenerate row: schur complement {schur:e} is not above guard {guard:e}")]
    DegenerateRow { schur: f64, guard: f64 },

    #[error("capacity exceeded: already holding {n_dim} rows for signal length {n_dim}")]
    Capacity { n_dim: usize },

    #[error("iterate became non-finite at inner iteration {iteration}")]
    Divergence { iteration: usize },
}

pub type Result<T> = std::result::Result<T, ZapError>;

pub(crate) fn invalid(msg: impl Into<String>) -> ZapError {
    ZapError::InvalidArgument(msg.into())
}
