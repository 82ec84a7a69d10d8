use thiserror::Error;

/// Errors produced by the simulator and the cancellers.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter set that cannot describe a valid component or scenario.
    #[error("configuration error: {0}")]
    Config(String),

    /// An input outside the domain of an operation (empty signal, mismatched
    /// dimensions, even polynomial order, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The least-squares basis matrix is numerically rank deficient.
    #[error("ill-conditioned basis matrix: condition estimate {condition:.3e} exceeds {limit:.1e}")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
