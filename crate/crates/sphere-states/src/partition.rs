use density_core::GridDensity;

use crate::direct;
use crate::error::SphereError;
use crate::phi::{ln_z_maxwellian, Phi};
use crate::table::{TableOptions, TableSet};

/// `ln Z_m(f, √u) = ln 2h^{*m}(u) − ln|S^{m−1}| − ((m−2)/2) ln u`.
///
/// Adaptive angular quadrature for `m ≤ 4`, the halving recursion above.
/// `−∞` when `u` lies beyond the support of `h^{*m}`.
pub fn log_partition(f: &GridDensity, m: usize, u: f64) -> Result<f64, SphereError> {
    if m < 2 || !(u > 0.0 && u.is_finite()) {
        return Err(SphereError::InvalidParameter(format!("log_partition needs m >= 2 and u > 0, got ({m}, {u})")));
    }
    let ln_a = if m <= 4 {
        direct::ln_a(&Phi::new(f), m, u)
    } else {
        TableSet::build(f, &[(m, u, u)], TableOptions::default())?.ln_a(m, u)?
    };
    Ok(ln_z_maxwellian(m, u) + ln_a)
}
