use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("modulus is reducible over F_{p}")]
    ReducibleModulus { p: u64 },
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("{s} does not divide {m}")]
    NotASubfield { s: usize, m: usize },
    #[error("enumeration of {size} elements exceeds cap {cap}")]
    CapExceeded { size: u128, cap: u128 },
    #[error("b = {b} is not coprime to d = {d}")]
    NotCoprime { b: i64, d: u64 },
    #[error("zero polynomial not allowed")]
    ZeroPolynomial,
    #[error("ambient dimension {n} exceeds cap {cap}")]
    DimensionCap { n: usize, cap: usize },
    #[error("element is not divisible by p (effective precision {prec})")]
    NotDivisible { prec: u32 },
    #[error("series truncation W_series = {have} too small, need weight {need}")]
    InsufficientSeriesWeight { have: String, need: String },
    #[error("effective precision exhausted (needed {needed}, have {have})")]
    PrecisionExhausted { needed: u32, have: u32 },
    #[error("constant term of series is not a unit")]
    NonUnitConstantTerm,
    #[error("iteration did not converge within {0} steps")]
    NonConvergence(usize),
    #[error("invalid problem specification: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
