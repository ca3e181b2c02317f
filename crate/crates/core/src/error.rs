use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("rotation axis is not a unit vector (|axis| = {0})")]
    NonUnitAxis(f64),
    #[error("point is off the constraint surface (max |P|,|R| = {0:e})")]
    OffConstraintSurface(f64),
    #[error("point is not gauge-fixed for the frame ({0})")]
    NotGaugeFixed(String),
    #[error("singular gauge: {0}")]
    SingularGauge(String),
    #[error("chart violation: {0}")]
    ChartViolation(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("sampler exhausted after {0} attempts")]
    SamplingExhausted(usize),
    #[error("unexpected constraint-gradient rank {0}")]
    UnexpectedRank(usize),
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
