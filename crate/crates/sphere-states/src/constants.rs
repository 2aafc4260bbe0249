//! Closed-form constants for conditioned tensorisations: the log-scalability
//! constant `C_F` and the log-power constant `C`.

use std::f64::consts::{E, PI};

use density_core::special::ln_gamma;
use density_core::{fisher_information, moments, validate_tail_bounds, GridDensity, TailModel};
use serde::{Deserialize, Serialize};

use crate::error::SphereError;
use crate::phi::HALF_LN_2PI;
use crate::profile::ConcentrationProfile;

/// `C_ε = sup_{x≥1} ln x / x^ε = 1/(eε)`.
pub fn c_eps(eps: f64) -> Result<f64, SphereError> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(SphereError::InvalidParameter(format!("epsilon must be positive, got {eps}")));
    }
    Ok(1.0 / (E * eps))
}

/// `∫₀^{2π} |cos θ|^p dθ = 2 B((p+1)/2, ½)`.
pub fn cos_power_integral(p: f64) -> f64 {
    2.0 * (0.5 * PI.ln() + ln_gamma(0.5 * (p + 1.0)) - ln_gamma(0.5 * p + 1.0)).exp()
}

/// `C_{k,β} = 2^{k(1+β)+1} ∫₀^{2π} |cos θ|^{k(1+β)} dθ`.
pub fn c_k_beta(k: f64, beta: f64) -> f64 {
    let p = k * (1.0 + beta);
    2f64.powf(p + 1.0) * cos_power_integral(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityConstant {
    pub value: f64,
    /// `max{|ln C₁|, |ln C₂|} + max{a₁, a₂}`.
    pub tail_part: f64,
    /// `sup_N |ln Z_N(f, √N) / N|` over the supplied `N` and the limit.
    pub z_part: f64,
    /// `N` attaining the supremum; `None` when the limit `(1 + ln 2π)/2` does.
    pub z_sup_at: Option<usize>,
}

/// `C_F` from declared tail bounds `C₁e^{−a₁v²} ≤ f ≤ C₂e^{a₂v²}` and
/// computed `(N, ln Z_N(f, √N))` pairs.
pub fn log_scalability_constant(
    f: &GridDensity,
    tail: &TailModel,
    log_z: &[(usize, f64)],
) -> Result<ScalabilityConstant, SphereError> {
    if !(tail.c1 > 0.0 && tail.c2 > 0.0 && tail.a1 > 0.0 && tail.a2 >= 0.0) {
        return Err(SphereError::InvalidParameter(format!(
            "log-scalability needs C₁, C₂, a₁ > 0 and a₂ >= 0, got {tail:?}"
        )));
    }
    validate_tail_bounds(f, tail)?;
    let tail_part = tail.c1.ln().abs().max(tail.c2.ln().abs()) + tail.a1.max(tail.a2);
    let mut z_part = 0.5 + HALF_LN_2PI;
    let mut z_sup_at = None;
    for &(n, lz) in log_z {
        if !lz.is_finite() {
            return Err(SphereError::Degenerate(format!("ln Z_{n} is not finite")));
        }
        let r = (lz / n as f64).abs();
        if r > z_part {
            z_part = r;
            z_sup_at = Some(n);
        }
    }
    Ok(ScalabilityConstant { value: tail_part + z_part, tail_part, z_part, z_sup_at })
}

/// Which version of the log-power constant to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LogPowerForm {
    /// General `Φ(v) = c + a|v|^k` with `f ≥ e^{−Φ}`, using `‖f‖_∞`.
    Phi { a: f64, k: f64, c: f64 },
    /// `Φ = a₁v² + |ln C₁|` from a declared Gaussian lower bound.
    Tail { c1: f64, a1: f64 },
    /// Polynomial lower bound of order `k`, using `√I(f) ≥ ‖f‖_∞` and
    /// `M_avg ≤ C_{k,β} M_{k(1+β)}`.
    Fisher { k: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogPowerConstant {
    pub value: f64,
    pub beta: f64,
    pub eps: f64,
    pub c_eps: f64,
    /// `‖f‖_∞`, or `√I(f)` in the Fisher form.
    pub sup_bound: f64,
    /// `M_{Φ,β}`, or `M_{k(1+β)}` in the Fisher form.
    pub m_phi: f64,
    /// `M_{avg,Φ,β}`, or `C_{k,β} M_{k(1+β)}` in the Fisher form.
    pub m_avg: f64,
    /// `(‖g‖_∞ + sup|λ|) / ((2π)^{−1/2} − sup|λ|)`.
    pub g_ratio: f64,
    /// Whether `f ≥ e^{−Φ}` holds at every grid node.
    pub lower_bound_holds: bool,
}

/// The g-dependent ratio `(‖g‖_∞ + sup|λ|) / ((2π)^{−1/2} − sup|λ|)`.
pub fn g_ratio(g_inf: f64, sup_lambda: f64) -> Result<f64, SphereError> {
    let den = (2.0 * PI).sqrt().recip() - sup_lambda;
    if !(den > 0.0) {
        return Err(SphereError::InvalidParameter(format!(
            "sup |λ_N| = {sup_lambda} exceeds (2π)^(-1/2); the concentration prefactor is undefined"
        )));
    }
    Ok((g_inf + sup_lambda) / den)
}

fn moment_checked(f: &GridDensity, order: f64) -> Result<f64, SphereError> {
    let rep = moments(f, &[0.5 * order], None)?;
    let m = &rep.m_2k[0];
    if m.divergent || m.truncation_warning || !m.value.is_finite() {
        return Err(SphereError::InvalidParameter(format!(
            "moment of order {order} is divergent or not resolved on the grid"
        )));
    }
    Ok(m.value)
}

/// `M_{avg,Φ,β} = ∫∫ (∫₀^{2π} Φ(v₁(θ))^{1+β} dθ) f(v₁) f(v₂) dv₁ dv₂` in polar
/// coordinates: the inner angle integral depends on `ρ` only.
fn m_avg_polar(f: &GridDensity, phi: impl Fn(f64) -> f64, q: f64) -> f64 {
    let n_theta = 256;
    let h = 2.0 * PI / n_theta as f64;
    let cosines: Vec<f64> = (0..n_theta).map(|l| (h * l as f64).cos()).collect();
    let top = f.v_max() * 2f64.sqrt();
    let panels = ((top / f.spacing()).ceil() as usize).max(16);
    let gl = density_core::quad::GaussLegendre::new(8);
    gl.composite(0.0, top, panels, |rho| {
        let bar: f64 = cosines.iter().map(|c| phi(rho * c).powf(q)).sum::<f64>() * h;
        let pair: f64 = (0..n_theta)
            .map(|l| f.eval(rho * cosines[l]) * f.eval(rho * cosines[(l + 3 * n_theta / 4) % n_theta]))
            .sum::<f64>()
            * h;
        rho * bar * pair
    })
}

/// The log-power constant of the conditioned tensorisation of `f`, with the
/// concentration prefactor taken from `profile`.
pub fn log_power_constant(
    f: &GridDensity,
    beta: f64,
    form: LogPowerForm,
    eps: f64,
    profile: &ConcentrationProfile,
) -> Result<LogPowerConstant, SphereError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(SphereError::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let ce = c_eps(eps)?;
    let q = 1.0 + beta;
    let g_ratio = g_ratio(profile.g_sup(), profile.sup_residual())?;
    let (sup_bound, m_phi, m_avg, lower_bound_holds) = match form {
        LogPowerForm::Fisher { k } => {
            if !(k >= 2.0) {
                return Err(SphereError::InvalidParameter(format!("the Fisher form needs k >= 2, got {k}")));
            }
            let m = moment_checked(f, k * q)?;
            let holds = f
                .values()
                .iter()
                .zip(f.grid().nodes())
                .all(|(&y, v)| y >= (-(v.abs().powf(k))).exp() * (1.0 - 1e-9));
            (fisher_information(f).sqrt(), m, c_k_beta(k, beta) * m, holds)
        }
        LogPowerForm::Phi { .. } | LogPowerForm::Tail { .. } => {
            let (a, k, c) = match form {
                LogPowerForm::Phi { a, k, c } => (a, k, c),
                LogPowerForm::Tail { c1, a1 } => (a1, 2.0, c1.ln().abs()),
                LogPowerForm::Fisher { .. } => unreachable!(),
            };
            if !(a >= 0.0 && k > 0.0 && c >= 0.0) {
                return Err(SphereError::InvalidParameter(format!("Φ needs a, c >= 0 and k > 0, got ({a}, {k}, {c})")));
            }
            let phi = move |v: f64| c + a * v.abs().powf(k);
            // M_Φ: on-grid quadrature; moments of |v|^{k} up to order kq must be resolved
            moment_checked(f, k * q)?;
            let m_phi = f.grid().integrate_with(|i, v| phi(v).powf(q) * f.values()[i]);
            let holds = f
                .values()
                .iter()
                .zip(f.grid().nodes())
                .all(|(&y, v)| y >= (-phi(v)).exp() * (1.0 - 1e-9));
            (f.max_value(), m_phi, m_avg_polar(f, phi, q), holds)
        }
    };
    // in the Fisher form sup_bound = √I(f), so this is I(f)^{ε/2}
    let sup_term = (ce * sup_bound.powf(eps)).powf(q);
    let avg_term = m_phi + m_avg;
    let inner = 2f64.powf(1.0 + 2.0 * beta) * 3f64.sqrt() * g_ratio * (2.0 * sup_term + avg_term);
    Ok(LogPowerConstant {
        value: inner.powf(1.0 / q),
        beta,
        eps,
        c_eps: ce,
        sup_bound,
        m_phi,
        m_avg,
        g_ratio,
        lower_bound_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert!((c_eps(1.0).unwrap() - 1.0 / E).abs() < 1e-15);
        assert!((c_k_beta(2.0, 1.0) - 24.0 * PI).abs() < 1e-10);
        assert!((cos_power_integral(2.0) - PI).abs() < 1e-12);
        assert!(c_eps(0.0).is_err());
    }
}
