//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("meshing failed: {0}")]
    MeshingFailure(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e}) in {context}")]
    NoConvergence {
        context: String,
        iterations: usize,
        residual: f64,
    },

    #[error("root bracketing failed in {context}: no sign change on [{lo:.6e}, {hi:.6e}]")]
    BracketingFailure { context: String, lo: f64, hi: f64 },

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
