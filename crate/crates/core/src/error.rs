use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-real spectrum at t = {t}, ξ = {xi:?}: |Im λ| = {imag:.3e}")]
    NonRealSpectrum { t: f64, xi: Vec<f64>, imag: f64 },

    #[error("Δ(·,ξ) vanishes identically for ξ = {xi:?}")]
    IdenticallyZeroDelta { xi: Vec<f64> },

    #[error("check function undefined for m = 1")]
    CheckFunctionUndefined,

    #[error("step size collapsed to {step:.3e} at t = {t}")]
    StiffnessFailure { t: f64, step: f64 },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("insufficient range for growth fit: {0}")]
    InsufficientRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("scenario error in `{field}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Schema { field: String, line: Option<usize>, message: String },

    #[error("scenario syntax error: {0}")]
    Syntax(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
