use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variable index {index} out of range for {nvars} variables")]
    IndexOutOfRange { index: usize, nvars: usize },
    #[error("operation requires a nonzero polynomial")]
    EmptyPolynomial,
    #[error("coefficient rings differ")]
    RingMismatch,
    #[error("variable counts differ ({left} vs {right})")]
    ArityMismatch { left: usize, right: usize },
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("exponent overflow")]
    ExponentOverflow,
    #[error("unknown variable `{name}` at byte {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("exponent out of range for the reduction plan")]
    ExponentOutOfRange,
    #[error("invalid substitution sequence: {0}")]
    InvalidSequence(String),
    #[error("{nvars} variables exceeds the search limit of {max}")]
    TooManyVariables { nvars: usize, max: usize },
    #[error("bases {i} and {j} are not coprime")]
    BasesNotCoprime { i: usize, j: usize },
    #[error("base {index} does not exceed the product degree on that variable")]
    BasesTooSmall { index: usize },
    #[error("element is not invertible modulo the given modulus")]
    NotInvertible,
    #[error("recovered a negative exponent; the product does not match this plan")]
    NegativeExponent,
    #[error("product degree exceeds the dense threshold")]
    DegreeTooLarge,
    #[error("coefficient bound exceeds the capacity of the NTT prime set")]
    CoefficientBoundTooLarge,
    #[error("generator constraint is infeasible: {0}")]
    InfeasibleConstraint(String),
    #[error("modulus {0} is not prime")]
    InvalidModulus(u64),
    #[error("malformed plan record: {0}")]
    PlanFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
