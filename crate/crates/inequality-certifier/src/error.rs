use density_core::DensityError;
use kac_boltzmann_solver::SolverError;
use sphere_states::SphereError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Sphere(#[from] SphereError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A stated hypothesis of the inequality excludes these parameters.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
