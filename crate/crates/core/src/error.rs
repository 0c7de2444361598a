use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("unknown edge id {0}")]
    UnknownEdge(usize),

    #[error("{what} limit exceeded: {actual} > {limit}")]
    LimitExceeded {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("length mismatch: trace has {trace} rounds, weights has {weights}")]
    LengthMismatch { trace: usize, weights: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("traces were produced on different sample graphs")]
    SampleMismatch,

    #[error("knowledge state not present in the value table (zero-probability outcome?)")]
    MissingDpState,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::LimitExceeded { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInstance(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
