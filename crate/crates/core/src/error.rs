use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported ambient dimension {0}; supported range is 1..=8")]
    UnsupportedDimension(usize),

    /// The data does not separate the requested spectral blocks; `observed_gap` is the
    /// best log-gap per symbol that was seen.
    #[error("inconclusive: {reason} (observed gap {observed_gap:.3e})")]
    Inconclusive { reason: String, observed_gap: f64 },

    #[error(
        "word budget exceeded: exhaustive scan needs {required} products but the budget is {budget}; \
         fall back to the Monte-Carlo scan"
    )]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("index {0} is not a dominated index")]
    NotDominated(usize),

    #[error("inconsistent splitting: {0}")]
    Inconsistent(String),

    #[error("missing projection dimension for index {0}")]
    MissingProjection(usize),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
