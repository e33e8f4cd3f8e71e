use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular series: {0}")]
    Singular(String),

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("polynomial is not real-rooted: imaginary residue {residue:e} at root {at}")]
    RealRootedness { residue: f64, at: String },

    #[error("polynomial is not real-rooted: only {real} of {degree} roots are real")]
    ComplexRoots { real: usize, degree: usize },

    #[error("negative root {root:e} below tolerance")]
    NegativeRoot { root: f64 },

    #[error("not the finite R-transform of a nonnegative-rooted polynomial: {0}")]
    InvalidTransform(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Usage and validation failures, as opposed to numeric or statistical ones.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::OrderMismatch { .. } | Error::Usage(_) | Error::Domain(_) | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Usage(format!("json: {e}"))
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
