//! Gaussian-profile concentration of `f^{⊗N}` near the energy sphere.
//!
//! With `Σ² = ∫v⁴f − 1`, the local limit theorem for `Σ V_i²` says
//! `G_N(u) = Σ √N h^{*N}(u)` approaches `g(u − N, N) = e^{−x²/(2NΣ²)}/√(2π)`.
//! The residual `λ_N(u) = G_N(u) − g(u − N, N)` is what the log-power and
//! log-scalability prefactors need.

use std::f64::consts::PI;

use density_core::special::ln_chi2_density;
use density_core::{moments, GridDensity};
use serde::{Deserialize, Serialize};

use crate::error::SphereError;
use crate::table::{TableOptions, TableSet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileOptions {
    /// Half-width of the scanned window in units of `√(NΣ²)`.
    pub window_sigmas: f64,
    /// Radius of the deviation sup in units of `√(NΣ²)`.
    pub radius_sigmas: f64,
    pub points: usize,
    pub tables: TableOptions,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { window_sigmas: 6.0, radius_sigmas: 5.0, points: 241, tables: TableOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub n: usize,
    pub u_lo: f64,
    pub u_hi: f64,
    /// The window was cut back to where `h^{*N} > 0`.
    pub shrunk: bool,
    /// `G_N(N)`, the measured profile at `x = 0`.
    pub measured_at_zero: f64,
    /// `sup_u |λ_N(u)|` over the window.
    pub sup_residual: f64,
    pub radius: f64,
    /// `sup_{|x|<R} |g(x, N) − (2π)^{−1/2}|` for the Gaussian candidate.
    pub candidate_deviation: f64,
    /// `sup_{|x|<R} |G_N(N + x) − (2π)^{−1/2}|`.
    pub measured_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationProfile {
    pub sigma2: f64,
    pub entries: Vec<ProfileEntry>,
    /// `sup_residual` decreases strictly along the entries.
    pub residual_decreasing: bool,
    pub warnings: Vec<String>,
}

impl ConcentrationProfile {
    /// `‖g‖_∞ = (2π)^{−1/2}`, attained at `x = 0` for every `N`.
    pub fn g_sup(&self) -> f64 {
        1.0 / (2.0 * PI).sqrt()
    }

    /// `sup_N sup_u |λ_N(u)|` over the measured `N`.
    pub fn sup_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.sup_residual).fold(0.0, f64::max)
    }
}

/// Below this `ln h^{*N}` is made of floored density values: one coordinate
/// at least sits where `f` vanishes.
const VANISHING: f64 = -590.0;

pub fn candidate(x: f64, n: usize, sigma2: f64) -> f64 {
    (-x * x / (2.0 * n as f64 * sigma2)).exp() / (2.0 * PI).sqrt()
}

pub fn g_concentration_profile(
    f: &GridDensity,
    ns: &[usize],
    opts: ProfileOptions,
) -> Result<ConcentrationProfile, SphereError> {
    let rep = moments(f, &[], None)?;
    let sigma2 = rep.m4 - 1.0;
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(SphereError::Degenerate(format!("Σ² = {sigma2}: V² is not spread")));
    }
    if opts.points < 3 {
        return Err(SphereError::InvalidParameter("profile needs at least 3 points".into()));
    }
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    let c0 = 1.0 / (2.0 * PI).sqrt();
    for &n in ns {
        if n < 3 {
            return Err(SphereError::InvalidParameter(format!("profile needs N >= 3, got {n}")));
        }
        let nf = n as f64;
        let sd = (nf * sigma2).sqrt();
        let lo = (nf - opts.window_sigmas * sd).max(0.0);
        let hi = nf + opts.window_sigmas * sd;
        let set = TableSet::build(f, &[(n, lo, hi)], opts.tables)?;
        let scale = sigma2.sqrt() * nf.sqrt();
        let mut samples = Vec::with_capacity(opts.points);
        for j in 0..opts.points {
            let u = lo + (hi - lo) * j as f64 / (opts.points - 1) as f64;
            if u <= 0.0 {
                continue;
            }
            let ln_h = ln_chi2_density(nf, u) + set.ln_a(n, u)?;
            samples.push((u, scale * ln_h.exp(), ln_h > VANISHING));
        }
        let finite: Vec<_> = samples.iter().filter(|s| s.2).collect();
        let shrunk = finite.len() < samples.len();
        if finite.is_empty() {
            return Err(SphereError::Degenerate(format!("h^*{n} vanishes on the whole window")));
        }
        let (u_lo, u_hi) = (finite[0].0, finite[finite.len() - 1].0);
        if shrunk {
            warnings.push(format!("N = {n}: window shrunk to [{u_lo}, {u_hi}] where h^*N > 0"));
        }
        let radius = opts.radius_sigmas * sd;
        let mut sup_residual: f64 = 0.0;
        let mut candidate_deviation: f64 = 0.0;
        let mut measured_deviation: f64 = 0.0;
        for &&(u, g, _) in &finite {
            let x = u - nf;
            let cand = candidate(x, n, sigma2);
            sup_residual = sup_residual.max((g - cand).abs());
            if x.abs() < radius {
                candidate_deviation = candidate_deviation.max((cand - c0).abs());
                measured_deviation = measured_deviation.max((g - c0).abs());
            }
        }
        let measured_at_zero = scale * (ln_chi2_density(nf, nf) + set.ln_a(n, nf)?).exp();
        entries.push(ProfileEntry {
            n,
            u_lo,
            u_hi,
            shrunk,
            measured_at_zero,
            sup_residual,
            radius,
            candidate_deviation,
            measured_deviation,
        });
    }
    let residual_decreasing = entries.windows(2).all(|w| w[1].sup_residual < w[0].sup_residual);
    Ok(ConcentrationProfile { sigma2, entries, residual_decreasing, warnings })
}
