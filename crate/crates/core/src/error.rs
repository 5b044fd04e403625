use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("polynomial is not homogeneous: monomial degrees {degrees:?}")]
    NotHomogeneous { degrees: Vec<u32> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero polynomial where a nonzero form is required")]
    ZeroPolynomial,

    #[error("zero input: {0}")]
    ZeroInput(String),

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("coordinate {0} is not an S-integer")]
    NotSInteger(String),

    #[error("variety is empty")]
    EmptyVariety,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    /// A configured computation limit was hit; distinct from a mathematical failure.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// An internal consistency check failed. Always a bug.
    #[error("internal invariant failure: {0}")]
    Invariant(String),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded(_))
    }
}
