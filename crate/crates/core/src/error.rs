use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("component {index}: weight must be positive and finite")]
    NonPositiveWeight { index: usize },
    #[error("component {index}: sigma must be nonnegative and finite")]
    NegativeSigma { index: usize },
    #[error("initial data vanishes identically")]
    VanishingData,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("constant offset must be nonnegative and finite")]
    InvalidOffset,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("initial data contains point masses and only admits closed-form evaluation")]
    ClosedFormOnlyData,
    #[error("time must be at least 1e-8, got {0}")]
    NonPositiveTime(f64),
    #[error("quadrature order {0} exceeds the cap of 128")]
    OrderTooLarge(usize),
    #[error("invalid quadrature spec: {0}")]
    InvalidQuadratureSpec(&'static str),
    #[error("tensor quadrature supports n <= 4, got n = {0}")]
    DimensionTooLarge(usize),
    #[error("finite-difference step {h} below 1e-6*sqrt(t)")]
    StepTooSmall { h: f64 },
    #[error("multi-index must have total order 1..=4")]
    InvalidMultiIndex,
    #[error("inadmissible parameters: {0}")]
    InadmissibleParams(&'static str),
    #[error("evaluation budget {0} below the minimum of 50")]
    BudgetTooSmall(usize),
    #[error("invalid sweep: {0}")]
    InvalidSweep(&'static str),
    #[error("numerical failure: {0}")]
    Numerical(&'static str),
}

impl Error {
    /// True for errors caused by the caller's inputs rather than the engines.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Numerical(_))
    }
}
