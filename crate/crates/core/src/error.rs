use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("precision exhausted: {available} digits available, {required} required")]
    PrecisionExhausted { available: i64, required: i64 },
    #[error("operands live in different fields (p = {left} and p = {right})")]
    PrimeMismatch { left: u32, right: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("{0} is not a usable prime")]
    InvalidPrime(u64),
    #[error("invalid literal: {0}")]
    InvalidLiteral(String),
    #[error("invalid precision budget: {0}")]
    InvalidBudget(String),
    #[error("the end omega has no height")]
    OmegaOperand,
    #[error("points agree on every known digit (down to height {known_to})")]
    IndistinguishableAtPrecision { known_to: i64 },
    #[error("branch {branch} out of range for degree {degree}")]
    BranchOutOfRange { branch: u64, degree: u64 },
    #[error("invalid tree degree q = {0}")]
    InvalidDegree(u64),
    #[error("step law has empty support")]
    EmptySupport,
    #[error("weights must be positive and sum to 1 (sum = {0})")]
    WeightsNotNormalized(String),
    #[error("non-exceptionality check failed: {0}")]
    NonExceptional(String),
    #[error("drift must be strictly positive here (drift = {0})")]
    NonPositiveDrift(String),
    #[error("drift must be strictly negative here (drift = {0})")]
    NonNegativeDrift(String),
    #[error("step budget of {budget} exhausted")]
    StepBudgetExceeded { budget: u64 },
    #[error("invalid cylinder: {0}")]
    InvalidCylinder(String),
    #[error("truncation too coarse: {0}")]
    TruncationTooCoarse(String),
    #[error("horizon too small: {0}")]
    HorizonTooSmall(String),
}
