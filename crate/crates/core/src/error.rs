use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range 0..={max}")]
    Index { index: usize, max: usize },

    /// A scalar argument lies outside the admissible interval.
    #[error("range error: {0}")]
    Range(String),

    /// The point sits on a boundary where the requested quantity is undefined.
    #[error("degenerate point: {0}")]
    Degenerate(String),

    /// The request would exceed a documented size ceiling.
    #[error("size limit exceeded: {0}")]
    Size(String),

    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
