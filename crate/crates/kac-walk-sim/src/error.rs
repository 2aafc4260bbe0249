use density_core::DensityError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("collision needs two distinct particles, got i = j = {0}")]
    SameParticle(usize),
    #[error("initial density must have unit energy, got {0}")]
    NotUnitEnergy(f64),
    #[error("records do not share sample times and histogram bins")]
    ScheduleMismatch,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
