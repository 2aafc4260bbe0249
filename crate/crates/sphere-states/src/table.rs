//! Tables of `ln A_m(u)` built by recursive halving of the particle number.
//!
//! Splitting `m = p + q` coordinates, the energy fraction of the first block
//! on a uniform sphere has the law of `sin²τ` with density
//! `∝ sin^{p−1}τ cos^{q−1}τ` on `[0, π/2]`, so
//!
//! `A_m(u) = ∫ A_p(u sin²τ) A_q(u cos²τ) dμ_{p,q}(τ)`.
//!
//! The quadrature in `τ` is restricted to where the beta weight is within a
//! fixed number of nats of its maximum, and self-normalized by the same
//! nodes, so a flat `A ≡ 1` (the Maxwellian) is reproduced to rounding. Each
//! table samples `ln A_m(r²)` on a uniform grid in the radius `r = √u` and is
//! read back by six-point Lagrange interpolation. In `u` the small-`m` tables
//! behave like `√u` near the origin; in `r` they are smooth and even.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use density_core::grid::stencil_at;
use density_core::quad::GaussLegendre;
use density_core::special::LogSum;
use density_core::{absolute_moment, GridDensity};
use serde::{Deserialize, Serialize};

use crate::error::SphereError;
use crate::phi::Phi;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableOptions {
    /// Radial node spacing, as a fraction of the velocity grid spacing.
    pub dr_scale: f64,
    /// Width of the `τ` window, in nats below the beta weight's maximum.
    pub window_nats: f64,
    /// Gauss–Legendre order per `τ` panel.
    pub gl_order: usize,
    /// Panel width as a fraction of the beta weight's standard deviation.
    pub panel_fraction: f64,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions { dr_scale: 0.5, window_nats: 40.0, gl_order: 8, panel_fraction: 0.5 }
    }
}

/// `ln A_m(r_j²)` on radii `r_j = r0 + j dr`.
#[derive(Clone, Debug, PartialEq)]
pub struct LnATable {
    pub m: usize,
    pub r0: f64,
    pub dr: f64,
    pub values: Vec<f64>,
    /// Above `support` the average vanishes (`ln A = −∞`).
    pub support: f64,
    /// Largest value (in nats, ≤ 0) of the integrand at a `τ` window end
    /// relative to its maximum, over all nodes. Near zero means the window
    /// truncates the integrand.
    pub edge_gap: f64,
}

impl LnATable {
    pub fn r_end(&self) -> f64 {
        self.r0 + self.dr * (self.values.len() - 1) as f64
    }

    pub fn u_start(&self) -> f64 {
        self.r0 * self.r0
    }

    pub fn u_end(&self) -> f64 {
        self.r_end().powi(2)
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        lo.sqrt() >= self.r0 - 1e-9 * self.dr && hi.min(self.support).sqrt() <= self.r_end() + 1e-9 * self.dr
    }

    /// `(u_j, ln A_m(u_j))` pairs.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(j, &v)| ((self.r0 + self.dr * j as f64).powi(2), v))
    }

    /// Interpolated `ln A_m(u)`; NaN outside the window.
    #[inline]
    pub fn lookup(&self, u: f64) -> f64 {
        if u > self.support {
            return f64::NEG_INFINITY;
        }
        let x = (u.max(0.0).sqrt() - self.r0) / self.dr;
        let last = (self.values.len() - 1) as f64;
        if !(x >= -1e-9 && x <= last + 1e-9) {
            return f64::NAN;
        }
        let s = stencil_at(x.clamp(0.0, last), self.values.len());
        let v = &self.values[s.base..s.base + 6];
        if v.iter().any(|y| *y == f64::NEG_INFINITY) {
            // next to a hard support edge: nearest node
            return self.values[(x.round() as usize).min(self.values.len() - 1)];
        }
        s.apply(&self.values)
    }
}

struct Plan {
    m: usize,
    p: usize,
    q: usize,
    r0: f64,
    dr: f64,
    n: usize,
    tau: (f64, f64),
}

/// A set of `ln A_m` tables sharing one base density.
#[derive(Clone, Debug)]
pub struct TableSet {
    phi: Phi,
    tables: BTreeMap<usize, LnATable>,
    opts: TableOptions,
}

fn beta_lw(p: usize, q: usize, t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    let a = if p > 1 { (p - 1) as f64 * s.ln() } else { 0.0 };
    let b = if q > 1 { (q - 1) as f64 * c.ln() } else { 0.0 };
    a + b
}

/// Mode and standard deviation of the split angle, and the window where the
/// beta weight is within `nats` of its maximum.
fn tau_window(p: usize, q: usize, nats: f64) -> (f64, f64, f64) {
    let (mode, curv) = if p == 1 {
        (0.0, (q - 1) as f64)
    } else {
        let t = (((p - 1) as f64) / ((q - 1) as f64)).sqrt().atan();
        let (s, c) = t.sin_cos();
        (t, (p - 1) as f64 / (s * s) + (q - 1) as f64 / (c * c))
    };
    let top = beta_lw(p, q, mode);
    let solve = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if beta_lw(p, q, mid) >= top - nats {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        outside
    };
    let lo = if p == 1 { 0.0 } else { solve(mode, 0.0) };
    let hi = solve(mode, FRAC_PI_2);
    (lo, hi, 1.0 / curv.sqrt())
}

impl TableSet {
    /// Builds tables covering every requested `(m, u_lo, u_hi)`, together with
    /// everything the recursion needs below them.
    pub fn build(f: &GridDensity, requests: &[(usize, f64, f64)], opts: TableOptions) -> Result<Self, SphereError> {
        let phi = Phi::new(f);
        let mut set = TableSet { phi, tables: BTreeMap::new(), opts };
        set.extend(requests)?;
        Ok(set)
    }

    /// Assembles a set from previously computed tables.
    pub fn from_tables(f: &GridDensity, tables: Vec<LnATable>, opts: TableOptions) -> Self {
        TableSet { phi: Phi::new(f), tables: tables.into_iter().map(|t| (t.m, t)).collect(), opts }
    }

    pub fn phi(&self) -> &Phi {
        &self.phi
    }

    pub fn options(&self) -> &TableOptions {
        &self.opts
    }

    pub fn table(&self, m: usize) -> Option<&LnATable> {
        self.tables.get(&m)
    }

    pub fn tables(&self) -> impl Iterator<Item = &LnATable> {
        self.tables.values()
    }

    /// Worst window-edge gap over all tables (see [`LnATable::edge_gap`]).
    pub fn edge_gap(&self) -> f64 {
        self.tables.values().map(|t| t.edge_gap).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn covers(&self, m: usize, lo: f64, hi: f64) -> bool {
        m <= 1 || self.tables.get(&m).map_or(false, |t| t.covers(lo, hi))
    }

    /// Adds tables for requests not yet covered, rebuilding any level whose
    /// window has to grow.
    pub fn extend(&mut self, requests: &[(usize, f64, f64)]) -> Result<(), SphereError> {
        let mut need: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        for &(m, lo, hi) in requests {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi && lo >= 0.0) {
                return Err(SphereError::InvalidParameter(format!("bad table window [{lo}, {hi}] for m = {m}")));
            }
            if m >= 2 && !self.covers(m, lo, hi) {
                let e = need.entry(m).or_insert((lo, hi));
                e.0 = e.0.min(lo);
                e.1 = e.1.max(hi);
            }
        }
        if need.is_empty() {
            return Ok(());
        }
        // keep existing windows so rebuilt tables still serve old callers
        for t in self.tables.values() {
            if let Some(e) = need.get_mut(&t.m) {
                e.0 = e.0.min(t.u_start());
                e.1 = e.1.max(t.u_end());
            }
        }
        let sigma2 = (absolute_moment(self.phi.density(), 4.0) - 1.0).max(0.0);
        let nats = self.opts.window_nats * (0.5 * sigma2).max(1.0);
        let v2 = self.phi.density().v_max().powi(2);
        let mut plans = Vec::new();
        while let Some((m, (lo, hi))) = need.pop_last() {
            let dr = self.opts.dr_scale * self.phi.density().spacing();
            let support = m as f64 * v2;
            let r0 = (lo.sqrt() - 3.0 * dr).max(0.0);
            let r_top = (hi.sqrt() + 3.0 * dr).min(support.sqrt() + 6.0 * dr);
            let n = (((r_top - r0) / dr).ceil() as usize + 1).max(8);
            let (u0, end) = (r0 * r0, (r0 + dr * (n - 1) as f64).powi(2));
            let (p, q) = (m / 2, m - m / 2);
            let tau = if m == 2 {
                (0.0, FRAC_PI_2)
            } else {
                let (a, b, _) = tau_window(p, q, nats);
                (a, b)
            };
            if m > 2 {
                let (sa, sb) = (tau.0.sin().powi(2), tau.1.sin().powi(2));
                for (k, lo_k, hi_k) in [(p, u0 * sa, end * sb), (q, u0 * (1.0 - sb), end * (1.0 - sa))] {
                    if k >= 2 && !self.covers(k, lo_k, hi_k.min(k as f64 * v2)) {
                        let e = need.entry(k).or_insert((lo_k, hi_k));
                        e.0 = e.0.min(lo_k);
                        e.1 = e.1.max(hi_k);
                    }
                }
            }
            plans.push(Plan { m, p, q, r0, dr, n, tau });
        }
        plans.reverse();
        for plan in plans {
            let t = self.compute(&plan, nats, v2)?;
            self.tables.insert(plan.m, t);
        }
        Ok(())
    }

    fn compute(&self, plan: &Plan, nats: f64, v2: f64) -> Result<LnATable, SphereError> {
        let support = plan.m as f64 * v2;
        let us: Vec<f64> = (0..plan.n).map(|j| (plan.r0 + plan.dr * j as f64).powi(2)).collect();
        if plan.m == 2 {
            let values = us.iter().map(|&u| if u > support { f64::NEG_INFINITY } else { self.phi.ln_a2(u) }).collect();
            return Ok(LnATable { m: 2, r0: plan.r0, dr: plan.dr, values, support, edge_gap: f64::NEG_INFINITY });
        }
        let (p, q) = (plan.p, plan.q);
        let (ta, tb) = plan.tau;
        let (_, _, sd) = tau_window(p, q, nats);
        let mut width = self.opts.panel_fraction * sd;
        if p == 1 {
            // the direct child resolves grid cells along v = √u sin τ
            let u_top = us[us.len() - 1].max(1.0);
            width = width.min(8.0 * self.phi.density().spacing() / u_top.sqrt());
        }
        let panels = (((tb - ta) / width).ceil() as usize).max(4);
        let gl = GaussLegendre::new(self.opts.gl_order);
        let nodes: Vec<(f64, f64, f64)> = gl
            .composite_nodes(ta, tb, panels)
            .into_iter()
            .map(|(t, w)| {
                let s = t.sin();
                (s * s, w.ln() + beta_lw(p, q, t), t)
            })
            .collect();
        let mut norm = LogSum::new();
        for n in &nodes {
            norm.add(n.1);
        }
        let ln_norm = norm.value();
        let ends: Vec<(f64, f64)> = [ta, tb]
            .iter()
            .filter(|&&t| t > 0.0 && t < FRAC_PI_2)
            .map(|&t| (t.sin().powi(2), beta_lw(p, q, t)))
            .collect();
        let mut edge_gap = f64::NEG_INFINITY;
        let mut values = Vec::with_capacity(us.len());
        for &u in &us {
            if u > support {
                values.push(f64::NEG_INFINITY);
                continue;
            }
            let mut acc = LogSum::new();
            let mut top = f64::NEG_INFINITY;
            for &(s2, lw, _) in &nodes {
                let x = lw + self.ln_a(p, u * s2)? + self.ln_a(q, u * (1.0 - s2))?;
                if x.is_nan() {
                    return Err(SphereError::OutsideWindow { m: plan.m, u });
                }
                acc.add(x);
                top = top.max(x);
            }
            if top > f64::NEG_INFINITY {
                // density of the integrand per unit τ, against the nodes' weighted values
                let peak = top - (tb - ta).ln() + (panels as f64 * self.opts.gl_order as f64).ln();
                for &(s2, lw) in &ends {
                    let e = lw + self.ln_a(p, u * s2)? + self.ln_a(q, u * (1.0 - s2))?;
                    edge_gap = edge_gap.max(e - peak);
                }
            }
            values.push(acc.value() - ln_norm);
        }
        Ok(LnATable { m: plan.m, r0: plan.r0, dr: plan.dr, values, support, edge_gap })
    }

    /// `ln A_m(u)` from the tables (closed form for `m = 1`).
    #[inline]
    pub fn ln_a(&self, m: usize, u: f64) -> Result<f64, SphereError> {
        match m {
            0 => Ok(0.0),
            1 => Ok(self.phi.ln_a1(u)),
            _ => {
                let t = self.tables.get(&m).ok_or(SphereError::MissingTable { m })?;
                let v = t.lookup(u);
                if v.is_nan() {
                    Err(SphereError::OutsideWindow { m, u })
                } else {
                    Ok(v)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use density_core::{maxwellian, Grid};

    #[test]
    fn windows_contain_the_mode() {
        for (p, q) in [(1, 2), (2, 2), (2, 3), (50, 50), (499, 500)] {
            let (a, b, sd) = tau_window(p, q, 40.0);
            assert!(a < b && sd > 0.0);
            assert!(a >= 0.0 && b <= FRAC_PI_2);
        }
    }

    #[test]
    fn maxwellian_tables_are_flat() {
        let m = maxwellian(1.0, &Grid::default()).unwrap();
        let set = TableSet::build(&m, &[(200, 150.0, 260.0), (7, 0.0, 20.0)], TableOptions::default()).unwrap();
        for (mm, u) in [(200, 200.0), (200, 151.0), (7, 7.0), (7, 0.5)] {
            assert!(set.ln_a(mm, u).unwrap().abs() < 1e-9, "m = {mm}, u = {u}");
        }
        assert!(set.ln_a(200, 10.0).is_err());
        assert!(matches!(set.ln_a(11, 10.0), Err(SphereError::MissingTable { m: 11 })));
    }
}
