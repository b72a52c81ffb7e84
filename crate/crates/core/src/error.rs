use thiserror::Error;

/// Errors produced by the library layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("moment of order {alpha} is infinite for this distribution")]
    InfiniteMoment { alpha: f64 },

    #[error("moment of order {alpha} was not computed for this profile")]
    MissingMoment { alpha: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("z = {z} lies outside the valid range [{lo}, {hi}]")]
    OutOfRange { z: f64, lo: f64, hi: f64 },

    #[error("degenerate linearization (sigma = {sigma:e}); run a degeneracy check")]
    Degenerate { sigma: f64 },

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    /// Every problem found in a configuration, not just the first.
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
}

impl Error {
    /// Process exit status: 1 validation, 2 degeneracy, 3 runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Degenerate { .. } => 2,
            Error::Evaluation(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
