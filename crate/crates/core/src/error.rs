use thiserror::Error;

/// Broad failure categories. The command-line front end maps these onto
/// process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    /// A size guard or a domain precondition was violated.
    Domain,
    /// Text input (truth table, circuit file, digit string) failed to parse.
    Parse,
    /// A proven identity failed to hold. Should never happen.
    Internal,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{what}: dimension {dim} exceeds guard {guard}")]
    GuardExceeded {
        what: &'static str,
        dim: usize,
        guard: usize,
    },

    #[error("local dimension must be at least 2, got {0}")]
    InvalidLocalDim(usize),

    #[error("operation requires qubits (local dimension 2), got local dimension {0}")]
    QubitOnly(usize),

    #[error("local dimension {0} is not prime")]
    NonPrime(usize),

    #[error("state is not normalized: norm^2 = {0}")]
    NotNormalized(f64),

    #[error("invalid probability {value} ({context})")]
    InvalidProbability { value: f64, context: String },

    #[error("site {site} out of range for {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("digit {digit} out of range for local dimension {local_dim}")]
    DigitOutOfRange { digit: usize, local_dim: usize },

    #[error("phase power {m} out of range 1..{local_dim}")]
    PowerOutOfRange { m: usize, local_dim: usize },

    #[error("mixture has no branches")]
    EmptyMixture,

    #[error("operator is not unitary: residual {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("Kraus set is not complete: residual {residual:e}")]
    IncompleteChannel { residual: f64 },

    #[error("operator is not a density matrix: {0}")]
    NotDensity(String),

    #[error("observable is zero")]
    ZeroObservable,

    #[error("degenerate fit: every reference expectation is zero for observable {0}")]
    DegenerateFit(String),

    #[error("truth table is not balanced")]
    NotBalanced,

    #[error("site {} (numbered from 1) has no usable signal: ground probability <= 1/2 or tied populations", site + 1)]
    DegenerateSite { site: usize },

    #[error("{0}")]
    Domain(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse { .. } => ErrorClass::Parse,
            Error::Internal(_) => ErrorClass::Internal,
            _ => ErrorClass::Domain,
        }
    }

    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
