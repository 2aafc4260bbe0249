//! One-dimensional probability densities on uniform velocity grids.
//!
//! Everything downstream (sphere states, the Kac–Boltzmann solver, the walk
//! sampler) consumes [`GridDensity`]. Quadrature is the composite trapezoid
//! rule on the grid, which is spectrally accurate for smooth densities that
//! vanish at the grid ends.

pub mod builtin;
pub mod density;
pub mod error;
pub mod grid;
pub mod io;
pub mod quad;
pub mod special;

pub use builtin::Builtin;
pub use density::{
    absolute_moment, fisher_information, l1_distance, l_log_l_norm, ln_floor, maxwellian, moments,
    normalize_unit_energy, pinsker_gap, relative_entropy, validate_tail_bounds, ExpMoment, GridDensity,
    MomentReport, MomentValue, TailModel, FLOOR, TOL_MASS,
};
pub use error::DensityError;
pub use grid::Grid;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
