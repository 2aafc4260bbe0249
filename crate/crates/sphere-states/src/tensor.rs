//! The conditioned tensorisation `F_N = f^{⊗N} / Z_N(f, √N)` and its exact
//! low-dimensional reductions.
//!
//! Marginals follow from the Fubini identity on the sphere. With
//! `A_m = h^{*m}/χ²_m` they take the form
//!
//! `Π_k(v) = p_N^{(k)}(|v|²) e^{Σφ(v_i)} A_{N−k}(N − |v|²) / A_N(N)`,
//!
//! where `p_N^{(k)}` is the `k`-marginal of the uniform law on
//! `S^{N−1}(√N)`. The entropy and the pair functionals reduce to one- and
//! two-dimensional integrals in these terms. One-particle integrals use
//! `v = √N sin τ`; pair integrals use polar coordinates `ρ = √N sin τ`
//! around the collision circle, with the uniform angular rule.

use std::f64::consts::PI;

use density_core::quad::GaussLegendre;
use density_core::special::ln_sphere_area;
use density_core::GridDensity;
use serde::{Deserialize, Serialize};

use crate::error::SphereError;
use crate::phi::{ln_z_maxwellian, Phi};
use crate::table::{TableOptions, TableSet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TensorOptions {
    pub tables: TableOptions,
    /// Highest marginal order with tables built up front.
    pub k_max: usize,
    /// Angular nodes on collision circles (multiple of 8).
    pub n_theta: usize,
    /// Target velocity extent of one Gauss–Legendre panel.
    pub panel_dv: f64,
    pub gl_order: usize,
}

impl Default for TensorOptions {
    fn default() -> Self {
        TensorOptions { tables: TableOptions::default(), k_max: 2, n_theta: 256, panel_dv: 0.08, gl_order: 8 }
    }
}

/// A quadrature value with an error estimate from halving the resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    fn from_pair(fine: f64, coarse: f64) -> Self {
        Estimate { value: fine, error: (fine - coarse).abs() }
    }
}

#[derive(Clone, Debug)]
pub struct ConditionedTensor {
    n: usize,
    set: TableSet,
    ln_a_n: f64,
    opts: TensorOptions,
}

/// `ln(|S^{N−k−1}| / |S^{N−1}|)`.
fn ln_area_ratio(n: usize, k: usize) -> f64 {
    ln_sphere_area((n - k) as f64) - ln_sphere_area(n as f64)
}

impl ConditionedTensor {
    pub fn new(base: &GridDensity, n: usize) -> Result<Self, SphereError> {
        Self::with_options(base, n, TensorOptions::default())
    }

    pub fn with_options(base: &GridDensity, n: usize, opts: TensorOptions) -> Result<Self, SphereError> {
        Self::check(base, n, &opts)?;
        let set = TableSet::build(base, &Self::requests(base, n, opts.k_max), opts.tables)?;
        Self::from_tables(set, n, opts)
    }

    /// Wraps an existing table set (e.g. one read from disk), checking that it
    /// covers everything the functionals need.
    pub fn from_tables(set: TableSet, n: usize, opts: TensorOptions) -> Result<Self, SphereError> {
        let base = set.phi().density().clone();
        Self::check(&base, n, &opts)?;
        for (m, lo, hi) in Self::requests(&base, n, opts.k_max) {
            if !set.covers(m, lo, hi) {
                return Err(SphereError::MissingTable { m });
            }
        }
        let ln_a_n = set.ln_a(n, n as f64)?;
        if !ln_a_n.is_finite() {
            return Err(SphereError::Degenerate(format!("Z_{n}(f, √{n}) vanishes")));
        }
        Ok(ConditionedTensor { n, set, ln_a_n, opts })
    }

    fn check(base: &GridDensity, n: usize, opts: &TensorOptions) -> Result<(), SphereError> {
        if n < 3 {
            return Err(SphereError::InvalidParameter(format!("need N >= 3, got {n}")));
        }
        if opts.n_theta < 16 || opts.n_theta % 8 != 0 {
            return Err(SphereError::InvalidParameter(format!("n_theta must be a multiple of 8, got {}", opts.n_theta)));
        }
        let m2 = base.second_moment();
        if (m2 - 1.0).abs() > 1e-8 {
            return Err(SphereError::InvalidParameter(format!("base density must have unit energy, m2 = {m2}")));
        }
        Ok(())
    }

    fn requests(base: &GridDensity, n: usize, k_max: usize) -> Vec<(usize, f64, f64)> {
        let nf = n as f64;
        let v2 = base.v_max().powi(2);
        let mut r = vec![(n, nf, nf)];
        for k in 1..=k_max.max(2).min(n - 1) {
            r.push((n - k, (nf - k as f64 * v2).max(0.0), nf));
        }
        r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> &GridDensity {
        self.set.phi().density()
    }

    pub fn tables(&self) -> &TableSet {
        &self.set
    }

    pub fn options(&self) -> &TensorOptions {
        &self.opts
    }

    fn phi(&self) -> &Phi {
        self.set.phi()
    }

    /// `ln Z_m(f, √u)` from the tables.
    pub fn log_partition(&self, m: usize, u: f64) -> Result<f64, SphereError> {
        Ok(ln_z_maxwellian(m, u) + self.set.ln_a(m, u)?)
    }

    /// `ln Z_N(f, √N)`.
    pub fn log_z(&self) -> f64 {
        ln_z_maxwellian(self.n, self.n as f64) + self.ln_a_n
    }

    /// `ln A_N(N) = ln Z_N(f, √N) + (N/2)(ln 2π + 1)`.
    pub fn ln_a_n(&self) -> f64 {
        self.ln_a_n
    }

    /// Builds the tables needed for marginals up to order `k`.
    pub fn ensure_order(&mut self, k: usize) -> Result<(), SphereError> {
        if k + 2 > self.n {
            return Err(SphereError::InvalidParameter(format!("marginal order {k} needs k <= N - 2")));
        }
        if k > self.opts.k_max {
            let reqs = Self::requests(self.base(), self.n, k);
            self.set.extend(&reqs)?;
            self.opts.k_max = k;
        }
        Ok(())
    }

    /// `Π_k(F_N)` at each point (each of length `k`).
    pub fn marginal(&self, k: usize, points: &[Vec<f64>]) -> Result<Vec<f64>, SphereError> {
        let n = self.n;
        if k == 0 || k + 2 > n {
            return Err(SphereError::InvalidParameter(format!("marginal order must satisfy 1 <= k <= N - 2, got {k}")));
        }
        let nf = n as f64;
        let c = ln_area_ratio(n, k) - 0.5 * (nf - 2.0) * nf.ln();
        points
            .iter()
            .map(|p| {
                if p.len() != k {
                    return Err(SphereError::InvalidParameter(format!("point of length {} for k = {k}", p.len())));
                }
                let s: f64 = p.iter().map(|v| v * v).sum();
                if s >= nf {
                    return Ok(0.0);
                }
                let phis: f64 = p.iter().map(|&v| self.phi().phi(v)).sum();
                let ln = c + 0.5 * (nf - k as f64 - 2.0) * (nf - s).ln() + phis + self.set.ln_a(n - k, nf - s)?
                    - self.ln_a_n;
                Ok(ln.exp())
            })
            .collect()
    }

    pub fn marginal1(&self, v: f64) -> Result<f64, SphereError> {
        Ok(self.marginal(1, &[vec![v]])?[0])
    }

    /// Nodes `(v, w Π₁(v), φ(v))` for one-particle integrals: `v = √N sin τ`
    /// with Gauss–Legendre panels in `τ`, the uniform-sphere factor
    /// `cos^{N−2}τ` folded into the weight.
    fn one_particle_nodes(&self, refine: usize) -> Result<Vec<(f64, f64, f64)>, SphereError> {
        let n = self.n;
        let nf = n as f64;
        let rn = nf.sqrt();
        let edge = (self.base().v_max() / rn).min(1.0).asin();
        let panels = ((2.0 * edge * rn / self.opts.panel_dv).ceil() as usize).max(8) * refine / 2;
        let gl = GaussLegendre::new(self.opts.gl_order);
        let c = ln_area_ratio(n, 1);
        let mut out = Vec::new();
        for (t, w) in gl.composite_nodes(-edge, edge, panels) {
            let (s, co) = t.sin_cos();
            let v = rn * s;
            let phi = self.phi().phi(v);
            let ln = c + (nf - 2.0) * co.ln() + phi + self.set.ln_a(n - 1, nf * co * co)? - self.ln_a_n;
            out.push((v, w * ln.exp(), phi));
        }
        Ok(out)
    }

    fn one_particle<G: Fn(f64, f64) -> f64>(&self, g: G) -> Result<Estimate, SphereError> {
        let mut r = [0.0; 2];
        for (slot, refine) in [(0, 2), (1, 1)] {
            r[slot] = self.one_particle_nodes(refine)?.iter().map(|&(v, w, phi)| w * g(v, phi)).sum();
        }
        Ok(Estimate::from_pair(r[0], r[1]))
    }

    /// `∫ Π₁` (one, up to quadrature error).
    pub fn marginal_mass(&self) -> Result<Estimate, SphereError> {
        self.one_particle(|_, _| 1.0)
    }

    /// `∫ |v|^p Π₁(v) dv`.
    pub fn marginal_moment(&self, p: f64) -> Result<Estimate, SphereError> {
        self.one_particle(|v, _| v.abs().powf(p))
    }

    /// `∫ e^{a|v|^μ} Π₁(v) dv`.
    pub fn marginal_exp_moment(&self, a: f64, mu: f64) -> Result<Estimate, SphereError> {
        self.one_particle(|v, _| (a * v.abs().powf(mu)).exp())
    }

    /// `H_N(F_N) = ∫ F_N ln F_N dσ = N ∫ Π₁ φ − ln A_N(N)`.
    ///
    /// The Maxwellian parts cancel exactly because `Σv_i² = N` on the sphere.
    pub fn entropy_hn(&self) -> Result<Estimate, SphereError> {
        let nf = self.n as f64;
        let e = self.one_particle(|_, phi| if phi.is_finite() { phi } else { 0.0 })?;
        let value = nf * e.value - self.ln_a_n;
        let err = nf * e.error + 1e-12 * self.ln_a_n.abs();
        if value < -(1e-8 + 10.0 * err) {
            return Err(SphereError::Negative { what: "H_N", value, tol: 1e-8 + 10.0 * err });
        }
        Ok(Estimate { value, error: err })
    }

    /// Polar nodes `(ρ, weight)` for pair integrals over `ρ ≤ min(v_max, √N)`:
    /// the weight carries `Π₂`'s radial density divided by `e^{Λ}`, so that
    /// `∫∫ Π₂ g = Σ w ∮ e^{Λ(α)} g dα`.
    fn pair_nodes(&self, refine: usize) -> Result<Vec<(f64, f64)>, SphereError> {
        let n = self.n;
        let nf = n as f64;
        let rn = nf.sqrt();
        let top = (self.base().v_max() / rn).min(1.0).asin();
        let panels = ((top * rn / self.opts.panel_dv).ceil() as usize).max(8) * refine / 2;
        let gl = GaussLegendre::new(self.opts.gl_order);
        let c = ((nf - 2.0) / (2.0 * PI)).ln();
        let mut out = Vec::new();
        for (t, w) in gl.composite_nodes(0.0, top, panels) {
            let (s, co) = t.sin_cos();
            let ln = c + s.ln() + (nf - 3.0) * co.ln() + self.set.ln_a(n - 2, nf * co * co)? - self.ln_a_n;
            out.push((rn * s, w * ln.exp()));
        }
        Ok(out)
    }

    /// `Λ(α_l) = φ(ρ cos α_l) + φ(ρ sin α_l)` on `n` uniform angles.
    fn circle(&self, rho: f64, n: usize) -> Vec<f64> {
        let c: Vec<f64> = (0..n).map(|l| self.phi().phi(rho * (2.0 * PI * l as f64 / n as f64).cos())).collect();
        let q = n / 4;
        (0..n).map(|l| c[l] + c[(l + 3 * q) % n]).collect()
    }

    fn pair<G: Fn(f64, &[f64]) -> f64>(&self, g: G) -> Result<Estimate, SphereError> {
        let mut r = [0.0; 2];
        for (slot, refine) in [(0, 2), (1, 1)] {
            let nt = self.opts.n_theta * refine / 2;
            r[slot] = self.pair_nodes(refine)?.iter().map(|&(rho, w)| w * g(rho, &self.circle(rho, nt))).sum();
        }
        Ok(Estimate::from_pair(r[0], r[1]))
    }

    /// `∫∫ Π₂` over the pair disc (one, up to the truncation at `v_max`).
    pub fn pair_mass(&self) -> Result<Estimate, SphereError> {
        self.pair(|_, lam| {
            let h = 2.0 * PI / lam.len() as f64;
            h * lam.iter().map(|l| l.exp()).sum::<f64>()
        })
    }

    /// `D_{N,γ}(F_N) = (N/4π) ∫∫∫ Π₂-weighted (1+ρ²)^γ ψ(e^Λ, e^{Λ_θ}) dθ dv₁dv₂`.
    ///
    /// On a circle, `Σ_{l,l'} ψ(E_l, E_{l'}) = 2n Σ_l (E_l − Ē)(Λ_l − Λ̄)`.
    pub fn entropy_production_dn(&self, gamma: f64) -> Result<Estimate, SphereError> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(SphereError::InvalidParameter(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        let nf = self.n as f64;
        let e = self.pair(|rho, lam| (1.0 + rho * rho).powf(gamma) * circle_psi_sum(lam))?;
        let scale = nf / (4.0 * PI);
        let (value, error) = (scale * e.value, scale * e.error);
        if value < -(1e-8 + 10.0 * error) {
            return Err(SphereError::Negative { what: "D_N", value, tol: 1e-8 + 10.0 * error });
        }
        Ok(Estimate { value, error })
    }

    /// `(1/2π) ∫₀^{2π} ∫ |ln F_N − ln F_N∘R_{12θ}|^{1+β} |F_N − F_N∘R_{12θ}| dσ dθ`.
    pub fn log_power_integral(&self, beta: f64) -> Result<Estimate, SphereError> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(SphereError::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        let e = self.pair(|_, lam| circle_log_power_sum(lam, 1.0 + beta))?;
        let s = 1.0 / (2.0 * PI);
        Ok(Estimate { value: s * e.value, error: s * e.error })
    }
}

/// `(2π/n)² Σ_{l,l'} (E_l − E_{l'})(Λ_l − Λ_{l'})` for `E = e^Λ`.
pub fn circle_psi_sum(lam: &[f64]) -> f64 {
    let n = lam.len() as f64;
    let h = 2.0 * PI / n;
    let top = lam.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return 0.0;
    }
    // e^Λ = e^top e^{Λ−top}; the covariance is scaled back at the end
    let e: Vec<f64> = lam.iter().map(|l| (l - top).exp()).collect();
    let eb = e.iter().sum::<f64>() / n;
    let lb = lam.iter().map(|&l| l.max(-1e300)).sum::<f64>() / n;
    let cov: f64 = e.iter().zip(lam).map(|(a, l)| (a - eb) * (l.max(-1e300) - lb)).sum();
    h * h * 2.0 * n * cov * top.exp()
}

/// `(2π/n)² Σ_{l,l'} |Λ_l − Λ_{l'}|^q |E_l − E_{l'}|`.
pub fn circle_log_power_sum(lam: &[f64], q: f64) -> f64 {
    let n = lam.len();
    let h = 2.0 * PI / n as f64;
    let e: Vec<f64> = lam.iter().map(|l| l.exp()).collect();
    let mut acc = 0.0;
    let square = q == 2.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in (i + 1)..n {
            let d = (lam[i] - lam[j]).abs();
            let p = if square { d * d } else { d.powf(q) };
            row += p * (e[i] - e[j]).abs();
        }
        acc += row;
    }
    2.0 * h * h * acc
}
