use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "series truncation cap of {cap} terms reached before the tail bound fell below {tol:e}"
    )]
    TruncationCap { cap: usize, tol: f64 },

    #[error("quadrature did not converge: last two estimates differ by {diff:e} at {nodes} nodes (tolerance {tol:e})")]
    NonConvergence { nodes: usize, diff: f64, tol: f64 },

    #[error("dimension mismatch: expected {expected} homogeneous coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("homogeneous coordinate vector is zero")]
    ZeroVector,

    #[error("field mismatch: point coordinates do not belong to the space's field")]
    FieldMismatch,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures caused by numerical non-convergence rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TruncationCap { .. } | Error::NonConvergence { .. }
        )
    }
}
