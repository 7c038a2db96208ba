use thiserror::Error;

use crate::scheme::CflLevel;

#[derive(Debug, Error)]
pub enum DfluxError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "CFL violation under {level:?}: kappa_used = {kappa_used:.17e} exceeds kappa_bound = {kappa_bound:.17e}"
    )]
    CflViolation {
        level: CflLevel,
        kappa_used: f64,
        kappa_bound: f64,
    },

    #[error("state has no cells")]
    EmptyState,

    #[error("parity mismatch: {0}")]
    ParityMismatch(String),

    #[error("grids are not nested: {0}")]
    NonNestedGrids(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DfluxError>;
