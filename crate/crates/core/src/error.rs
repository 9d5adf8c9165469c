use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Weight found outside the four logical OAM modes.
    #[error("state leaks {weight:.3e} of its norm outside the logical subspace")]
    Leakage { weight: f64 },

    #[error("mode ell={ell} lies outside the workspace |ell| <= {half_width}")]
    WorkspaceOverflow { ell: i32, half_width: u32 },

    #[error("invalid bench composition: {0}")]
    Composition(String),

    #[error("maximum-likelihood iteration did not converge after {iterations} iterations (last step {last_step:.3e})")]
    NonConvergence { iterations: usize, last_step: f64 },

    #[error("counts table is empty")]
    EmptyTable,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
