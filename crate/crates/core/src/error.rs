use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TmodError {
    #[error("bound {bound} exceeds the sieve budget {budget}")]
    Capacity { bound: u64, budget: u64 },
    #[error("{0} is not squarefree")]
    NotSquarefree(i64),
    #[error("gcd({a}, {n}) > 1")]
    NonCoprime { a: i64, n: u64 },
    #[error("{a} is not a quadratic residue mod {l}")]
    NotQuadraticResidue { a: i64, l: u64 },
    #[error("no representation of {0} by the requested form")]
    NoRepresentation(i64),
    #[error("precision {bits} insufficient: {what}")]
    Precision { bits: u32, what: &'static str },
    #[error("wrong path: {0}")]
    WrongPath(String),
    #[error("unsupported domain: {0}")]
    Unsupported(String),
    #[error("no stabilization up to level {0}")]
    Stabilization(u32),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, TmodError>;

impl From<std::io::Error> for TmodError {
    fn from(e: std::io::Error) -> Self {
        TmodError::Io(e.to_string())
    }
}

impl From<csv::Error> for TmodError {
    fn from(e: csv::Error) -> Self {
        TmodError::Io(e.to_string())
    }
}
