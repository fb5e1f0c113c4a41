use thiserror::Error;

/// Errors raised by the geometry, function-space and verification layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Unsupported or malformed configuration (grid scheme, sample counts, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A parameter is outside the domain where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical value became non-finite or otherwise unusable.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A body violates the requirements of an operation (origin not interior, ...).
    #[error("invalid body: {0}")]
    InvalidBody(String),

    /// The operation is not available for this body representation.
    #[error("unsupported representation: {0}")]
    Unsupported(String),

    /// The input function is zero almost everywhere.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that stem from numerics or parameter domains rather
    /// than from malformed input.
    pub fn is_numerical_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Numerical(_)
                | Error::InvalidBody(_)
                | Error::Degenerate(_)
                | Error::Unsupported(_)
        )
    }
}
