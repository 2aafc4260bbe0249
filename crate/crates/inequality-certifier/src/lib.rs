//! Entropy–entropy production inequalities for the Kac walk and the
//! Kac–Boltzmann equation: explicit constants, both sides evaluated
//! numerically, and pass/fail reports with tolerance budgets.

pub mod certify;
pub mod constants;
pub mod error;
pub mod family;
pub mod report;
pub mod transfer;

pub use certify::{
    certify_log_power, certify_log_scalability, certify_thm13, certify_thm13_along, certify_thm22, certify_thm23,
    certify_villani, thm13_inputs, Thm13Inputs, Thm13Options,
};
pub use constants::{
    c_f_thm13, constant_thm22i, constant_thm22i_numeric, constant_thm23i_derived, constant_thm23i_displayed,
    constant_thm23i_numeric, constant_thm24, decay_envelope_thm24, epsilon_thm23, exponent_thm22, half_time_thm24,
};
pub use error::CertifyError;
pub use family::{log_power_family, log_scalable_family, FamilyConstants, Mode};
pub use report::{summary_line, HypothesisCheck, HypothesisStatus, Params, TheoremReport, Verdict};
pub use transfer::{brackets, certify_transfer_thm41, Brackets};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
