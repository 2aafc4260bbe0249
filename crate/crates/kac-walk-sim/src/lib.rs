//! Monte Carlo simulation of the Kac walk on `S^{N−1}(√N)` with chaotic
//! initial data and pooled one-particle observables.

pub mod chaos;
pub mod error;
pub mod io;
pub mod state;
pub mod walk;

pub use chaos::{bin_masses, propagation_of_chaos_check, ChaosDistance};
pub use error::WalkError;
pub use state::{collision_rotate, metropolis_sweeps, sample_chaotic_initial, InverseCdf, ParticleState};
pub use walk::{
    run_ensemble, run_from_state, run_stream, run_walk, step_gillespie, walk_rng, Event, EventSampler, Histogram,
    TrajectoryRecord, WalkConfig, WalkSample,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
