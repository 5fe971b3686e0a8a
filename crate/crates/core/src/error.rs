use thiserror::Error;

/// Errors raised by the arithmetic layers and the verification engine.
///
/// A congruence that does not hold is *not* an error: it is reported as a
/// failing record. Errors are reserved for misuse and impossible requests.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus exponent must be at least 1")]
    ZeroExponent,
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: String, right: String },
    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: String, modulus: String },
    #[error("denominator {denominator} is divisible by {p}")]
    DenominatorNotCoprime { denominator: String, p: u64 },
    #[error("{value} is not divisible by {p}^{v}")]
    NotDivisible { value: String, p: u64, v: u32 },
    #[error("precision exhausted: need {needed} digits, have {available}")]
    PrecisionExhausted { needed: u64, available: u32 },
    #[error("invalid binomial family: {0}")]
    InvalidFamily(String),
    #[error("Bernoulli index {index} exceeds cache bound {bound}")]
    CacheBoundExceeded { index: usize, bound: usize },
    #[error("B_{index} has a denominator divisible by {p}")]
    IrregularReduction { index: usize, p: u64 },
    #[error("IrregularCache: {0}")]
    IrregularCache(String),
    #[error("exact evaluation bound exceeded: n = {n} > {bound}")]
    ExactBoundExceeded { n: u64, bound: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("statement {id} not applicable: {reason}")]
    NotApplicable { id: String, reason: String },
    #[error("I/O: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
