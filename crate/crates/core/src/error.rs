use thiserror::Error;

/// Errors raised anywhere in the engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("mismatched q-exponent denominators {0} and {1}")]
    MismatchedQGrid(u32, u32),
    #[error("mismatched w-exponent denominators {0} and {1}")]
    MismatchedWGrid(u32, u32),
    #[error("exponent {value} is not representable with denominator {den}")]
    OffGrid { value: String, den: u32 },
    #[error("exponent arithmetic overflowed")]
    Overflow,
    #[error("cannot invert the zero series")]
    ZeroSeries,
    #[error("leading coefficient {0} is not a unit")]
    NonUnit(String),
    #[error("division by zero")]
    ZeroDenominator,
    #[error("denominator factor vanishes identically")]
    ZeroFactor,
    #[error("pole: {0}")]
    Pole(String),
    #[error("gram matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("pochhammer symbol with negative q-exponent {0} does not expand as a power series")]
    DivergentProduct(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
