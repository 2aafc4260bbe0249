use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    /// Every problem found in the config, one per entry.
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Schema(Vec<String>),
    #[error(transparent)]
    Density(#[from] density_core::DensityError),
    #[error(transparent)]
    Sphere(#[from] sphere_states::SphereError),
    #[error(transparent)]
    Walk(#[from] kac_walk_sim::WalkError),
    #[error(transparent)]
    Solver(#[from] kac_boltzmann_solver::SolverError),
    #[error(transparent)]
    Certify(#[from] inequality_certifier::CertifyError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Threads(String),
}

impl RunError {
    /// Process exit code: 2 for a rejected config, 3 for runtime failures.
    /// A completed run with failed inequality checks exits 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Schema(_) => 2,
            _ => 3,
        }
    }
}
