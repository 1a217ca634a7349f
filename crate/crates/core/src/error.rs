//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZonalError {
    /// Malformed input: bad body, bad density, inconsistent parameters.
    #[error("validation error: {0}")]
    Validation(String),
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Quadrature or iteration failed to reach its tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A density is not integrable against a measure.
    #[error("integrability error: {0}")]
    Integrability(String),
    /// Estimator configuration is unusable (for example an ill-conditioned radius grid).
    #[error("configuration error: {0}")]
    Config(String),
    /// A valuation backend cannot evaluate the requested body.
    #[error("capability error: {0}")]
    Capability(String),
    #[error("io error: {0}")]
    Io(String),
}

impl ZonalError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            ZonalError::Validation(_) | ZonalError::Domain(_) | ZonalError::Config(_) | ZonalError::Io(_) => 2,
            ZonalError::Numerical(_) | ZonalError::Integrability(_) => 3,
            ZonalError::Capability(_) => 4,
        }
    }
}

impl From<std::io::Error> for ZonalError {
    fn from(e: std::io::Error) -> Self {
        ZonalError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for ZonalError {
    fn from(e: serde_json::Error) -> Self {
        ZonalError::Validation(format!("json: {e}"))
    }
}

impl From<csv::Error> for ZonalError {
    fn from(e: csv::Error) -> Self {
        ZonalError::Validation(format!("csv: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, ZonalError>;
