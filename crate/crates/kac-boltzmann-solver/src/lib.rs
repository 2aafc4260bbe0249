//! Deterministic solver for the spatially homogeneous Kac–Boltzmann
//! equation `∂_t f = Q_γ f` on a uniform velocity grid.

pub mod entropy;
pub mod error;
pub mod io;
pub mod kernel;
pub mod solve;

pub use entropy::{entropy_h, entropy_production_dgamma, Dissipation, C0};
pub use error::SolverError;
pub use kernel::{project_conservative, CollisionKernelCache};
pub use solve::{collision_q, default_dt, moment_history, solve, solve_with_cache, SampleRecord, SolverConfig, Trajectory};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
