use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Head offset lies on the body rotation axis (`o_x = 0`).
    #[error("singular actuation mapping: head offset has o_x = 0")]
    SingularMapping,

    #[error("invalid spline: parametric speed {0} is not positive")]
    InvalidSpline(f64),

    #[error("arcsin argument {0} outside [-1, 1]")]
    Domain(f64),

    #[error("simulation diverged at t = {t:.3} s")]
    Diverged { t: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
