//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Incompatible vector/matrix dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A matrix that must be symmetric positive-definite is not.
    #[error("matrix is not positive definite: {0}")]
    NotSpd(String),

    /// A parameter violates its stated constraints.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A mixture component lost the minimum effective sample size.
    #[error("component {group} collapsed (effective size {t_g:.3} < {min_size:.0})")]
    Collapse {
        group: usize,
        t_g: f64,
        min_size: f64,
    },

    /// Every initialization of a fit protocol failed.
    #[error("all initializations failed: {0}")]
    AllFitsFailed(String),

    /// Malformed or unreadable input data.
    #[error("data error: {0}")]
    Data(String),

    /// Invalid command-line usage.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
