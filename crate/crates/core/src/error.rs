use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The configured working precision cannot certify the requested accuracy.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("gcd({a}, {b}) = {gcd}, expected coprime arguments")]
    NotCoprime { a: i64, b: i64, gcd: i64 },

    #[error("no solution of a*{k} + b*{n} = -1 with the requested parity")]
    ParityUnreachable { k: i64, n: i64 },

    #[error("determinant {0} is not 1")]
    Determinant(f64),

    #[error("angle {0} lies inside the excluded band around a multiple of pi")]
    NearSingularAngle(f64),

    #[error("no decay certificate for test function kind `{0}`")]
    TailBoundUnavailable(&'static str),

    #[error("approximant construction failed: {0}")]
    ConstructionFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
