use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive definite")]
    SingularMatrix,

    #[error("infeasible antenna positions: {0}")]
    Infeasible(String),

    #[error("cannot place {count} antennas with spacing {spacing} in a {size} x {size} region")]
    PlacementInfeasible { count: usize, spacing: f64, size: f64 },

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    /// True for errors caused by the user's configuration rather than by a run.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}
