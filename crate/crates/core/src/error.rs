use thiserror::Error;

/// Errors across configuration construction, moves, flows, and the oracle.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mass: {0}")]
    InvalidMass(String),

    #[error("invalid interval: [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("move precondition violated: {0}")]
    Precondition(String),

    #[error("invalid flow specification: {0}")]
    InvalidFlow(String),

    #[error("region count out of supported range: {0}")]
    OutOfRange(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
