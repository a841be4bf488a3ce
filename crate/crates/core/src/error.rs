use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature order {0} outside 1..=512")]
    QuadratureOrder(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid step {0}: must be positive")]
    InvalidStep(f64),
    #[error("no room for a finite difference at {x} with step {h} inside [0, 1]")]
    DomainExhausted { x: f64, h: f64 },
    #[error("invalid bracket [{lo}, {hi}] with tolerance {tol}")]
    InvalidBracket { lo: f64, hi: f64, tol: f64 },
    #[error("no sign change across [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("root finding did not converge; best estimate {best}")]
    RootNotConverged { best: f64 },
    #[error("{family}: {message}")]
    InvalidParameter {
        family: &'static str,
        message: String,
    },
    #[error("model needs at least one component")]
    EmptyModel,
    #[error("component index {index} out of range for {len} components")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("per-component threshold probabilities must be nondecreasing")]
    NonMonotoneThresholds,
    #[error("invalid ranks: {0}")]
    InvalidRanks(String),
    #[error("thresholds must be nondecreasing")]
    InvalidThresholds,
    #[error("{what}: order {order} exceeds the limit {max}")]
    TooLarge {
        what: &'static str,
        order: usize,
        max: usize,
    },
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("conditioning probability {0} below 1e-12")]
    DegenerateConditioning(f64),
    #[error("invalid copula: {0}")]
    InvalidCopula(String),
    #[error("{0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures of the numerical machinery itself, as opposed to
    /// rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::DomainExhausted { .. }
                | Error::NoSignChange { .. }
                | Error::RootNotConverged { .. }
                | Error::DegenerateConditioning(_)
        )
    }
}
