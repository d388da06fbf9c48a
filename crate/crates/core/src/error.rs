use std::path::PathBuf;

/// Errors produced by the toolkit.
///
/// Every variant maps onto a short machine-readable category (see
/// [`Error::category`]) which the command-line front end prints as
/// `ERROR:<category>:<message>`.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Format(String),

    #[error("size mismatch: expected {expected} bytes, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("{0}")]
    Domain(String),

    #[error("{0}")]
    Coverage(String),

    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Validation(_) => "validation",
            Error::Format(_) => "format",
            Error::SizeMismatch { .. } => "size",
            Error::Domain(_) => "domain",
            Error::Coverage(_) => "coverage",
            Error::Unsupported(_) => "unsupported",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)+) => {{
        let holds: bool = $cond;
        if !holds {
            return Err($crate::error::Error::$variant(format!($($arg)+)));
        }
    }};
}
pub(crate) use ensure;
