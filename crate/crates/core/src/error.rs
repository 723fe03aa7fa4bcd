use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Condition ratio `lambda_min / lambda_max` of a Gram matrix fell below the
    /// rank threshold.
    #[error("numerically rank-deficient {what}: eigenvalue ratio {ratio:.3e}")]
    NumericalRank { what: &'static str, ratio: f64 },

    #[error("{solver} diverged (non-finite iterate) at {context}")]
    Divergence { solver: &'static str, context: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("config error at {location}: key `{key}`: {message}")]
    Config {
        key: String,
        location: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
