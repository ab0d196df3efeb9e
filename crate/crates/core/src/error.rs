use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("lattice dimension must be at least 1")]
    ZeroDimension,
    #[error("site set is empty")]
    EmptySiteSet,
    #[error("duplicate site {0:?}")]
    DuplicateSite(Vec<i64>),
    #[error("non-finite input {0}")]
    NonFinite(f64),
    #[error("bin width must be positive and finite, got {0}")]
    InvalidBinWidth(f64),
    #[error("bin index of {x} at width {b} exceeds the exactly representable range")]
    IndexRange { x: f64, b: f64 },
    #[error("f({x}) = {fx}: the normalized estimator is only defined where f(x) > 0")]
    NonPositiveDensity { x: f64, fx: f64 },
    #[error("quadrature did not converge: achieved error {achieved:e}, requested {tolerance:e}")]
    Quadrature { achieved: f64, tolerance: f64 },
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("invalid field model: {0}")]
    InvalidModel(String),
    #[error("coordinate {coord} does not fit a {bits}-bit counter lane")]
    CoordinateRange { coord: i64, bits: u32 },
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("mixing profile is not summable: {0}")]
    NotSummable(String),
    #[error("cannot certify: {0}")]
    CannotCertify(String),
    #[error("invalid mixing profile: {0}")]
    InvalidProfile(String),
    #[error("profile does not match the requested condition: {0}")]
    ConditionMismatch(String),
    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
    #[error("mixing hypotheses not certified: {0}")]
    HypothesisRefused(String),
}
