use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("variable index {index} out of range for dimension {dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },

    #[error("penalty weight must be positive, got {0}")]
    NonPositiveWeight(i64),

    #[error("rho must be a positive integer, got {0}")]
    InvalidRho(i64),

    #[error("integer overflow while {0}")]
    Overflow(&'static str),

    #[error("constraint infeasible over {{0,1}}^n: normalized bound {bound} < 0")]
    InfeasibleConstraint { bound: i64 },

    #[error("variable {variable} has both positive and negative coefficients across constraints; cannot normalize by complementation")]
    MixedSigns { variable: usize },

    #[error("problem has zero variables")]
    EmptyProblem,

    #[error("no positive time or iteration budget given")]
    InvalidBudget,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension {dimension} exceeds enumeration cap {cap}")]
    EnumerationCap { dimension: usize, cap: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
