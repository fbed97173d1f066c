use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{num}/{den} is not in lowest terms")]
    NotReduced { num: u64, den: u64 },

    #[error("{num}/{den} does not lie in the open unit interval")]
    OutOfRange { num: u64, den: u64 },

    #[error("invalid digit string: {0}")]
    InvalidDigits(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(&'static str),

    #[error("{value} is not coprime to {modulus}")]
    NotCoprime { value: u64, modulus: u64 },

    #[error("ensemble {0} is empty")]
    EmptyEnsemble(String),

    #[error("window of length {window} is longer than the expansion (length {len})")]
    WindowTooLong { window: usize, len: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
