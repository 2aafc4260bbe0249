use thiserror::Error;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("negative or non-finite sample {value} at node {index}")]
    InvalidSample { index: usize, value: f64 },
    #[error("density has no mass on the grid")]
    ZeroMass,
    #[error("grid too narrow: truncated mass {lost:e} exceeds tolerance {tol:e}")]
    GridTooNarrow { lost: f64, tol: f64 },
    #[error("densities are sampled on different grids")]
    GridMismatch,
    #[error("reference density vanishes at v = {v} where the density has mass {value:e}")]
    SupportMismatch { v: f64, value: f64 },
    #[error("second moment is zero or not finite")]
    DegenerateEnergy,
    #[error("declared tail bound violated at node v = {v}: f = {value:e}, bound = {bound:e} ({side})")]
    TailViolation { v: f64, value: f64, bound: f64, side: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed density file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
