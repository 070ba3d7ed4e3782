//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("observation set is empty")]
    EmptyObservations,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("observation {index} lies outside the domain box")]
    PointOutsideDomain { index: usize },

    #[error("psi factor diverges at |v| = 0")]
    ZeroSpeed,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("MISE objective has no finite minimizer (bias term B = 0)")]
    UnboundedBandwidth,

    #[error("distance D must be positive, got {0}")]
    NonpositiveDistance(f64),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("path minimum is not unique: states {first} and {second} tie")]
    AmbiguousMinimum { first: usize, second: usize },

    #[error("{0}")]
    Unsupported(&'static str),
}
