//! `H(f|M_1)` and the entropy dissipation
//!
//! `D_γ(f) = c₀ ∫∫∫ (1+v²+w²)^γ ψ(f(v)f(w), f(v')f(w')) dθ dv dw`,
//! `ψ(x, y) = (x − y)(ln x − ln y)`,
//!
//! which equals `−(d/dt) H(f(t)|M_1)` along the flow with [`C0`].

use std::f64::consts::PI;

use density_core::density::FLOOR;
use density_core::quad::GaussLegendre;
use density_core::{maxwellian, relative_entropy, GridDensity};
use serde::{Deserialize, Serialize};

use crate::error::SolverError;

/// Prefactor of the dissipation integral. Symmetrizing `−∫ Q_γ f ln f` over
/// `v ↔ w` and pre/post-collision pairs turns the `1/π` of the operator
/// into `1/(4π)`.
pub const C0: f64 = 1.0 / (4.0 * PI);

pub fn entropy_h(f: &GridDensity) -> Result<f64, SolverError> {
    Ok(relative_entropy(f, &maxwellian(1.0, f.grid())?)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dissipation {
    pub value: f64,
    /// |full − half resolution|.
    pub error: f64,
    /// `f` reaches the floor inside the region where `f⊗f` carries mass,
    /// so ψ is dominated by floored logarithms.
    pub unreliable: bool,
}

/// `Σ_{l,l'} ψ(E_l, E_{l'}) = 2n Σ_l (E_l − Ē)(Λ_l − Λ̄)` on one circle.
fn circle_psi(lam: &[f64]) -> f64 {
    let n = lam.len() as f64;
    let e: Vec<f64> = lam.iter().map(|l| l.exp()).collect();
    let eb = e.iter().sum::<f64>() / n;
    let lb = lam.iter().sum::<f64>() / n;
    2.0 * n * e.iter().zip(lam).map(|(a, l)| (a - eb) * (l - lb)).sum::<f64>()
}

fn dissipation_at(f: &GridDensity, gamma: f64, panels: usize, n_min: usize) -> f64 {
    let top = f.v_max() * 2f64.sqrt();
    let gl = GaussLegendre::new(8);
    let h = f.spacing();
    gl.composite(0.0, top, panels, |rho| {
        let want = (2.0 * PI * rho / (2.0 * h)).ceil() as usize;
        let n = 4 * ((want.max(n_min) + 3) / 4);
        let c: Vec<f64> = (0..n).map(|l| f.ln_eval(rho * (2.0 * PI * l as f64 / n as f64).cos())).collect();
        let q = n / 4;
        let lam: Vec<f64> = (0..n).map(|l| c[l] + c[(l + 3 * q) % n]).collect();
        let hh = 2.0 * PI / n as f64;
        rho * (1.0 + rho * rho).powf(gamma) * hh * hh * circle_psi(&lam)
    }) * C0
}

/// `D_γ(f)` by polar quadrature: Gauss–Legendre in `ρ`, uniform angles on
/// each circle (at least `theta_nodes`, and one per two grid cells of arc).
pub fn entropy_production_dgamma(f: &GridDensity, gamma: f64, theta_nodes: usize) -> Result<Dissipation, SolverError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(SolverError::InvalidConfig(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    if theta_nodes < 16 || theta_nodes % 8 != 0 {
        return Err(SolverError::InvalidConfig(format!("theta_nodes must be a multiple of 8, got {theta_nodes}")));
    }
    let top = f.v_max() * 2f64.sqrt();
    let panels = (top / (2.0 * f.spacing())).ceil() as usize;
    let fine = dissipation_at(f, gamma, panels, theta_nodes);
    let coarse = dissipation_at(f, gamma, panels / 2, theta_nodes / 2);
    Ok(Dissipation { value: fine, error: (fine - coarse).abs(), unreliable: floor_dominated(f) })
}

fn floor_dominated(f: &GridDensity) -> bool {
    let top = f.max_value();
    let grid = f.grid();
    let reach = (0..grid.n_points)
        .filter(|&i| f.values()[i] >= 1e-8 * top)
        .map(|i| grid.node(i).abs())
        .fold(0.0, f64::max)
        * 2f64.sqrt();
    (0..grid.n_points).any(|i| grid.node(i).abs() <= reach && f.values()[i] <= FLOOR * 1e10)
}
