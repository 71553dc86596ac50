//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("rank deficiency detected at column {col} (pivot {pivot:.3e})")]
    RankDeficient { col: usize, pivot: f64 },

    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("near rank-deficient column {col} in differentiable orthonormalization (pivot {pivot:.3e})")]
    NearRankDeficient { col: usize, pivot: f64 },

    #[error("non-finite gradient encountered (component {index})")]
    NonFiniteGradient { index: usize },

    #[error("training aborted after {skips} consecutive rejected steps at epoch {epoch}")]
    TrainingAborted { skips: usize, epoch: usize },

    #[error("degenerate sample {index}: zero norm")]
    DegenerateSample { index: usize },

    #[error("cluster {cluster} has {size} members, needs at least {needed}")]
    EmptyOrThinCluster {
        cluster: usize,
        size: usize,
        needed: usize,
    },

    #[error("parameter outside its box: component {component} = {value}")]
    OutOfBox { component: usize, value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// Process exit code used by the command-line driver.
    ///
    /// 2 = IO/format, 3 = dimension/data, 4 = training failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Format(_) | Error::UnknownPreset(_) | Error::InvalidInput(_) => 2,
            Error::DimensionMismatch(_)
            | Error::RankDeficient { .. }
            | Error::NotSymmetric(_)
            | Error::NotPositiveDefinite
            | Error::DegenerateSample { .. }
            | Error::EmptyOrThinCluster { .. }
            | Error::OutOfBox { .. } => 3,
            Error::NearRankDeficient { .. }
            | Error::NonFiniteGradient { .. }
            | Error::TrainingAborted { .. } => 4,
        }
    }
}

/// Shorthand for dimension-mismatch errors.
pub(crate) fn dim_err(msg: impl Into<String>) -> Error {
    Error::DimensionMismatch(msg.into())
}
