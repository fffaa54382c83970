use thiserror::Error;

/// Errors raised across the crate.
///
/// The variants are grouped by how a caller is expected to react: validation
/// problems mean the input was wrong, cap and precision problems mean the
/// search was too large or the data too coarse, and `Falsified` means a proven
/// statement failed on a concrete instance (which points at a bug).
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported field: {0}")]
    UnsupportedField(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("enumeration cap exceeded: estimated {estimate:.0} points, cap {cap}")]
    CapExceeded { estimate: f64, cap: u64 },

    #[error("insufficient p-adic precision: {0}")]
    Precision(String),

    #[error("sup lower bound not met: {0}")]
    LowerBound(String),

    #[error("invariant violation: {0}")]
    Falsified(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnsupportedField(_) | Error::Invalid(_) | Error::Json(_) => 2,
            Error::CapExceeded { .. } | Error::Precision(_) | Error::LowerBound(_) => 3,
            Error::Falsified(_) => 4,
            Error::Io(_) | Error::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
