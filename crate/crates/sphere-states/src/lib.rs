//! States on the energy sphere `S^{N−1}(√N)` built from a one-particle
//! density: normalization functions, conditioned tensorisations and their
//! marginals, entropy functionals, and the constants that control them.

pub mod constants;
pub mod direct;
pub mod energy_law;
pub mod error;
pub mod fft;
pub mod io;
pub mod partition;
pub mod phi;
pub mod profile;
pub mod table;
pub mod tensor;

pub use constants::{log_power_constant, log_scalability_constant, LogPowerConstant, LogPowerForm, ScalabilityConstant};
pub use energy_law::EnergyLawDensity;
pub use error::SphereError;
pub use partition::log_partition;
pub use profile::{g_concentration_profile, ConcentrationProfile, ProfileOptions};
pub use tensor::{ConditionedTensor, Estimate, TensorOptions};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
