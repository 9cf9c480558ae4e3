use thiserror::Error;

use crate::model::ParamName;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("inadmissible arc set {0:06b}: {1}")]
    InadmissibleArcs(u8, &'static str),

    #[error("unknown token `{0}`")]
    UnknownToken(String),

    #[error("newton did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular jacobian (condition estimate {0:e})")]
    SingularJacobian(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no sign change of the construction function on [0, {0}]")]
    BracketFailure(f64),

    #[error("closed-form equilibrium {label} at {point:?} missing from the brute-force set")]
    Consistency { label: String, point: [f64; 3] },

    #[error("equilibrium residual {0:e} exceeds the classification threshold")]
    StaleEquilibrium(f64),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("sweep range leaves the validity domain of {param}: [{lo}, {hi}]")]
    SweepRange { param: ParamName, lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
