use thiserror::Error;

/// Errors raised across the library.
///
/// The variants map one-to-one onto the CLI exit-status classes, see
/// [`Error::exit_code`].
#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data failed validation (bad mesh, inadmissible bound, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A caller asked for something the object cannot provide.
    #[error("usage error: {0}")]
    Usage(String),

    /// A hypothesis of a comparison theorem does not hold, so the bound is
    /// not asserted.
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),

    /// An iterative or adaptive numerical procedure failed to converge.
    #[error("numeric error: {message} (worst interval [{lo:.6e}, {hi:.6e}])")]
    Numeric { message: String, lo: f64, hi: f64 },

    /// A simulation exceeded its step budget.
    #[error("timeout: {0}")]
    Timeout(String),

    /// Expression or file parse failure. `position` is a byte column for
    /// expressions and a 1-based line number for files.
    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn numeric(message: impl Into<String>, lo: f64, hi: f64) -> Self {
        Error::Numeric {
            message: message.into(),
            lo,
            hi,
        }
    }

    /// Process exit status for this error class: 1 hypothesis violation,
    /// 2 validation, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Hypothesis(_) => 1,
            Error::Numeric { .. } | Error::Timeout(_) => 3,
            Error::Domain(_) | Error::Validation(_) | Error::Usage(_) | Error::Parse { .. } | Error::Io(_) => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
