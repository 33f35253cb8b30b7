use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("basis truncation not converged: {0}")]
    Convergence(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("drive plan: {0}")]
    Plan(String),

    #[error("step size {dt:e} s too coarse; use dt <= {suggested:e} s")]
    StepSize { dt: f64, suggested: f64 },

    #[error("resonant regime: detuning is zero")]
    Resonant,

    #[error("fit: {0}")]
    Fit(String),

    #[error("schema: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
