//! Crate-wide error type.
//!
//! Precision questions that cannot be settled honestly are surfaced through
//! dedicated variants (`IndeterminateDivisor`, `Indeterminate`, ...) instead
//! of silently rounding to zero.

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("p must be an odd prime, got {0}")]
    NotOddPrime(u64),

    #[error("denominator is zero")]
    ZeroDenominator,

    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),

    #[error("division by zero")]
    DivisionByZero,

    #[error("indeterminate divisor: indistinguishable from 0 at absolute precision {abs_prec}")]
    IndeterminateDivisor { abs_prec: i64 },

    #[error("not a p-adic integer: valuation {0} is negative")]
    NegativeValuation(i64),

    #[error("value is only known to valuation >= {bound}, which does not certify {needed}")]
    InsufficientPrecision { bound: i64, needed: String },

    #[error("indeterminate direction: neither coordinate has a certified minimal valuation")]
    IndeterminateDirection,

    #[error("direction (0:0) is not a point of P^1")]
    ZeroDirection,

    #[error("series variable mismatch: {0} vs {1}")]
    VariableMismatch(String, String),

    #[error("monomial degree {degree} is not below the degree bound {bound}")]
    DegreeOutOfRange { degree: u32, bound: u32 },

    #[error("degree bound must be at least 2, got {0}")]
    DegreeBoundTooSmall(u32),

    #[error("coefficient precision must be at least 1")]
    CoeffPrecTooSmall,

    #[error("substituted series has a nonzero constant term")]
    NonzeroConstantTerm,

    #[error("series is zero to working precision")]
    SeriesZeroToPrecision,

    #[error("series is not integral: denominator exponent {0} must be cleared first")]
    DenominatorNotCleared(u32),

    #[error("no unit coefficient below the degree bound: not divisible at this precision")]
    NoUnitCoefficient,

    #[error("distinguished degree {lambda} reaches the truncation bound {bound}")]
    LambdaExceedsTruncation { lambda: u32, bound: u32 },

    #[error("constant term has valuation {0} > 0: series is not invertible")]
    NotInvertible(i64),

    #[error("anticyclotomic direction (0:1) is excluded from the derivative criterion")]
    AnticyclotomicExcluded,

    #[error("indeterminate: {0}")]
    Indeterminate(String),

    #[error("finite level too large: p^(2n) = {0} exceeds the cap {1}")]
    SizeCapExceeded(u64, u64),

    #[error("presentation has no generators")]
    EmptyPresentation,

    #[error("p = {p} divides the conductor N = {n}: bad reduction at p")]
    BadReductionAtP { p: u64, n: u64 },

    #[error("{0} is not a negative fundamental discriminant")]
    NotFundamental(i64),

    #[error("invalid input: {field}: {message}")]
    InvalidInput { field: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
