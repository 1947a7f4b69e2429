use thiserror::Error;

/// Errors raised by pbkit operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PbError {
    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// An input is too large for the requested method.
    #[error("size error: {0}")]
    Size(String),
    /// The input is degenerate for the requested quantity (zero variance, all-zero parameters, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// Malformed textual input.
    #[error("parse error: {0}")]
    Parse(String),
    /// Arithmetic mode does not support the requested method.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl PbError {
    pub fn kind(&self) -> &'static str {
        match self {
            PbError::Domain(_) => "domain",
            PbError::Size(_) => "size",
            PbError::Degenerate(_) => "degenerate",
            PbError::Parse(_) => "parse",
            PbError::Unsupported(_) => "unsupported",
        }
    }
}

pub type Result<T> = std::result::Result<T, PbError>;
