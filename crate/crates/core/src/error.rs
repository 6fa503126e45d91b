use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("lambda = {lambda} is at the critical point lambda_c({q}); at-criticality behaviour is unsupported")]
    AtCriticality { lambda: f64, q: f64 },

    #[error("range error: {0}")]
    Range(String),

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("n = {n} exceeds the enumeration limit {max} (pass the long-run override for n = 7)")]
    TooLarge { n: usize, max: usize },

    #[error("insufficient samples: {got} records for {batches} batches")]
    InsufficientSamples { got: usize, batches: usize },

    #[error("resource limit reached after {records} records: {reason}")]
    ResourceLimit { records: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
