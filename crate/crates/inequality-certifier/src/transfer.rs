//! Transfer of a one-particle inequality `D_γ(f) ≥ K₁ H(f|M)^{1+ε}` to the
//! conditioned tensorisation, through explicit brackets
//!
//! `C₁ H ≤ H_N/N ≤ C₂ H`, `C₃ D_γ(f) ≤ D_{N,γ}/N ≤ C₄ D_γ(f)`.
//!
//! Writing `F_N = f^{⊗N}/Z_N`, the marginal ratios `r_k = Π_k/f^{⊗k}`
//! depend on `Σv_i²` only. Then
//!
//! - `H_N/N − H = ∫(r₁ − 1) f φ − ln A_N(N)/N`, `φ = ln(f/M_1)`;
//! - `D_{N,γ}/N` is the `D_γ(f)` integrand weighted by `r₂(ρ)`, because ψ is
//!   one-homogeneous and the collision kernel is radial.
//!
//! Both ratios are evaluated where `f` carries its mass.

use density_core::{maxwellian, GridDensity};
use kac_boltzmann_solver::{entropy_h, entropy_production_dgamma};
use serde::{Deserialize, Serialize};
use sphere_states::ConditionedTensor;

use crate::error::CertifyError;
use crate::report::{HypothesisCheck, HypothesisStatus, Params, TheoremReport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Brackets {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Radius of the disc on which `r₂` was scanned.
    pub pair_radius: f64,
}

/// Largest `|v|` with `f(v) ≥ 1e−10 max f`.
fn reach(f: &GridDensity) -> f64 {
    let top = f.max_value();
    f.grid()
        .nodes()
        .into_iter()
        .zip(f.values())
        .filter(|(_, &y)| y >= 1e-10 * top)
        .map(|(v, _)| v.abs())
        .fold(0.0, f64::max)
}

/// The Remark brackets for the conditioned tensorisation `ct` of `f`, given
/// `H = H(f|M_1)`.
pub fn brackets(f: &GridDensity, ct: &ConditionedTensor, h: f64) -> Result<Brackets, CertifyError> {
    let nf = ct.n() as f64;
    let r = reach(f).min(0.999 * nf.sqrt());
    let m = maxwellian(1.0, f.grid())?;
    // sup|r₁ − 1| and ∫ f|φ| over the core
    let mut dev: f64 = 0.0;
    let mut abs_phi = 0.0;
    let grid = *f.grid();
    for i in 0..grid.n_points {
        let v = grid.node(i);
        let y = f.values()[i];
        let w = grid.spacing() * if i == 0 || i + 1 == grid.n_points { 0.5 } else { 1.0 };
        if v.abs() <= r && y > 0.0 {
            let r1 = ct.marginal1(v)? / y;
            dev = dev.max((r1 - 1.0).abs());
            abs_phi += w * y * (y / m.values()[i]).ln().abs();
        }
    }
    let delta_h = dev * abs_phi + (ct.ln_a_n() / nf).abs();
    let (c1, c2) = if h > 0.0 { ((1.0 - delta_h / h).max(0.0), 1.0 + delta_h / h) } else { (1.0, 1.0) };
    let rho_max = (2f64.sqrt() * reach(f)).min(0.999 * nf.sqrt());
    let (mut c3, mut c4) = (f64::INFINITY, 0.0f64);
    for j in 0..=200 {
        let rho = rho_max * j as f64 / 200.0;
        let v = rho / 2f64.sqrt();
        let y = f.eval(v);
        if y <= 0.0 {
            continue;
        }
        let r2 = ct.marginal(2, &[vec![v, v]])?[0] / (y * y);
        c3 = c3.min(r2);
        c4 = c4.max(r2);
    }
    Ok(Brackets { c1, c2, c3, c4, pair_radius: rho_max })
}

/// `D_{N,γ}/N ≥ K₁ C₃ (H_N/(C₂ N))^{1+ε}` with `K₁ = D_γ(f)/H^{1+ε}`
/// measured on `f`.
pub fn certify_transfer_thm41(
    f: &GridDensity,
    gamma: f64,
    eps_limit: f64,
    ct: &ConditionedTensor,
    theta_nodes: usize,
) -> Result<TheoremReport, CertifyError> {
    if !(eps_limit.is_finite() && eps_limit >= 0.0) {
        return Err(CertifyError::InvalidParameter(format!("epsilon must be nonnegative, got {eps_limit}")));
    }
    let nf = ct.n() as f64;
    let h = entropy_h(f)?.max(0.0);
    let dg = entropy_production_dgamma(f, gamma, theta_nodes)?;
    let hn = ct.entropy_hn()?;
    let dn = ct.entropy_production_dn(gamma)?;
    let lhs = dn.value / nf;
    let params = Params { n: Some(ct.n()), gamma: Some(gamma), eps: Some(eps_limit), ..Default::default() };
    if h < 1e-10 {
        let hyp = vec![HypothesisCheck::holds("equilibrium", format!("H = {h:.3e}"))];
        return Ok(TheoremReport::assemble("thm41", params, lhs, 0.0, 0.0, dn.error / nf + 1e-12, hyp, false));
    }
    let k1 = dg.value / h.powf(1.0 + eps_limit);
    let b = brackets(f, ct, h)?;
    let hyp = vec![
        HypothesisCheck::holds("one-particle inequality", format!("K1 = {k1:.6e} measured on f")),
        if b.c3.is_finite() && b.c3 > 0.0 {
            HypothesisCheck::holds("brackets", format!("C = [{:.6}, {:.6}, {:.6}, {:.6}]", b.c1, b.c2, b.c3, b.c4))
        } else {
            HypothesisCheck::new("brackets", HypothesisStatus::Unverifiable, "pair ratio unavailable")
        },
    ];
    let x = hn.value.max(0.0) / (b.c2 * nf);
    let rhs = k1 * b.c3 * x.powf(1.0 + eps_limit);
    // D_γ(f) enters through K₁ and the rhs is linear in it
    let err = dn.error / nf + rhs * (dg.error / dg.value.max(1e-300)) + rhs * (1.0 + eps_limit) * hn.error / hn.value.max(1e-300);
    Ok(TheoremReport::assemble("thm41", params, lhs, rhs, k1 * b.c3, err, hyp, dg.unreliable)
        .with_detail("K1", k1)
        .with_detail("C1", b.c1)
        .with_detail("C2", b.c2)
        .with_detail("C3", b.c3)
        .with_detail("C4", b.c4)
        .with_detail("pair_radius", b.pair_radius))
}
