use density_core::DensityError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SphereError {
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no ln A table for m = {m}; extend the table set")]
    MissingTable { m: usize },
    #[error("u = {u} lies outside the tabulated window of m = {m}")]
    OutsideWindow { m: usize, u: f64 },
    #[error("{what} = {value} is negative beyond tolerance {tol}")]
    Negative { what: &'static str, value: f64, tol: f64 },
    #[error("degenerate density: {0}")]
    Degenerate(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
