use thiserror::Error;

/// Errors produced by the decomposition, precoding, feedback and simulation code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular or too ill-conditioned to invert")]
    Singular,

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    /// The prescribed (1,1) entry of R lies outside the singular-value interval.
    #[error("r = {r} is outside the admissible interval [{lambda2}, {lambda1}]")]
    OutOfInterval { r: f64, lambda1: f64, lambda2: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("format error: {0}")]
    Format(String),

    /// The precoded symbol vector vanished, so it cannot be power-normalized.
    #[error("precoded symbol vector has zero energy")]
    DegenerateSymbol,

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
