use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {0:?} lies outside the chart domain")]
    OutOfChart(Vec<f64>),

    #[error("coframe is singular at {point:?} (condition number {condition:e})")]
    SingularFrame { point: Vec<f64>, condition: f64 },

    #[error("derivative data unavailable: {0}")]
    DerivativeUnavailable(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("body has no mass points")]
    EmptyBody,

    #[error("center of mass is offset by {offset:?} (|offset| = {norm:e}, tolerance {tol:e})")]
    CenterOffset {
        offset: Vec<f64>,
        norm: f64,
        tol: f64,
    },

    #[error("inertia tensor is not isotropic (max deviation from I*delta is {deviation:e}); dynamics requires I^ab = I delta^ab")]
    Anisotropic { deviation: f64 },

    #[error("implicit solver did not converge after {iterations} iterations (last update {last_update:e})")]
    NonConvergence { iterations: usize, last_update: f64 },

    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("no closed-form geodesic oracle for scenario '{0}'")]
    OracleUnavailable(String),

    #[error("trajectory has {found} samples, at least {required} required")]
    TooFewSamples { required: usize, found: usize },
}
