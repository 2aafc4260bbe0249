use density_core::DensityError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("collision cache was built for a different grid or gamma")]
    CacheMismatch,
    #[error("initial datum must have unit mass and energy (mass {mass}, energy {energy})")]
    NotNormalized { mass: f64, energy: f64 },
    #[error("entropy increased by {increase:e} at step {step} (t = {t}); reduce dt")]
    EntropyIncrease { step: usize, t: f64, increase: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
