use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("format error: {0}")]
    Format(String),

    #[error("ordering error: {0}")]
    Ordering(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("column `{column}` has zero range in the fitting sample")]
    Scaling { column: String },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("series misaligned, missing dates: {}", .0.join(", "))]
    Join(Vec<String>),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Format(err.to_string())
    }
}
