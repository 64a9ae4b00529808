use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("eigenvalue iteration did not converge for a {dim}x{dim} matrix")]
    NoConvergence { dim: usize },

    #[error("matrix dimension {dim} exceeds the configured cap of {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("enumeration of {paths} control paths exceeds the cap of {cap}")]
    EnumerationCap { paths: u128, cap: u128 },

    #[error("horizon {horizon} is too short, at least {min} steps are required")]
    HorizonTooShort { horizon: usize, min: usize },

    #[error("trajectory has {len} samples, at least {min} are required")]
    TrajectoryTooShort { len: usize, min: usize },

    #[error("insufficient excitation: regressor rank {rank} < {needed}; deficient directions: {directions}")]
    InsufficientExcitation {
        rank: usize,
        needed: usize,
        directions: String,
    },

    #[error("unknown author {0}")]
    UnknownAuthor(u32),

    #[error("empty gain grid")]
    EmptyGrid,

    #[error("parse error in {source_name}: {message}")]
    Parse { source_name: String, message: String },

    #[error("csv error: {0}")]
    Csv(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    /// Errors caused by malformed input rather than by a numerical failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::NoConvergence { .. } | Error::InsufficientExcitation { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
