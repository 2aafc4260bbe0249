//! The law of `V²` for `V ~ f`: `h(u) = (f(√u) + f(−√u)) / (2√u)`.
//!
//! `h` is singular at `u = 0` whenever `f(0) > 0`; integrals against it are
//! taken in `s = √u`, where the density becomes `f(s) + f(−s)` on `[0, v_max]`.

use density_core::quad::GaussLegendre;
use density_core::GridDensity;

use crate::error::SphereError;

#[derive(Clone, Debug)]
pub struct EnergyLawDensity {
    f: GridDensity,
    gl: GaussLegendre,
}

impl EnergyLawDensity {
    pub fn new(f: &GridDensity) -> Result<Self, SphereError> {
        let vals = f.values();
        let grid = f.grid();
        let top = vals.iter().cloned().fold(0.0, f64::max);
        if top <= 0.0 {
            return Err(SphereError::Degenerate("density vanishes on the grid".into()));
        }
        if let Some(z) = grid.zero_index() {
            let side = |i: Option<usize>| i.and_then(|i| vals.get(i)).copied().unwrap_or(0.0);
            let others = vals.iter().enumerate().filter(|(i, _)| *i != z).map(|(_, v)| *v).fold(0.0, f64::max);
            if vals[z] > 0.0 && (others <= 1e-300 || (side(z.checked_sub(1)) == 0.0 && side(Some(z + 1)) == 0.0)) {
                return Err(SphereError::Degenerate("isolated spike at v = 0".into()));
            }
        }
        Ok(EnergyLawDensity { f: f.clone(), gl: GaussLegendre::new(6) })
    }

    pub fn u_max(&self) -> f64 {
        self.f.v_max().powi(2)
    }

    /// `h(u)`; infinite at `u = 0` when `f(0) > 0`.
    pub fn eval(&self, u: f64) -> f64 {
        if u < 0.0 || u > self.u_max() {
            return 0.0;
        }
        let s = u.sqrt();
        let g = self.f.eval(s) + self.f.eval(-s);
        if s == 0.0 {
            return if g > 0.0 { f64::INFINITY } else { 0.0 };
        }
        g / (2.0 * s)
    }

    /// `∫_{s_a}^{s_b} (f(s) + f(−s)) ds`, split at grid nodes so that every
    /// piece is polynomial.
    fn s_integral(&self, sa: f64, sb: f64, weight: impl Fn(f64) -> f64) -> f64 {
        let h = self.f.spacing();
        let v0 = self.f.v_min();
        let sb = sb.min(self.f.v_max());
        if sb <= sa {
            return 0.0;
        }
        // nodes are symmetric, so `v0 + i h` crosses s whenever −s crosses one
        let mut cuts = vec![sa];
        let first = ((sa - v0) / h).floor() as i64 + 1;
        let mut i = first;
        loop {
            let x = v0 + i as f64 * h;
            if x >= sb {
                break;
            }
            if x > sa {
                cuts.push(x);
            }
            i += 1;
        }
        cuts.push(sb);
        cuts.windows(2)
            .map(|c| self.gl.integrate(c[0], c[1], |s| (self.f.eval(s) + self.f.eval(-s)) * weight(s)))
            .sum()
    }

    /// `P(V² ∈ [a, b])`.
    pub fn cell_mass(&self, a: f64, b: f64) -> f64 {
        self.s_integral(a.max(0.0).sqrt(), b.max(0.0).sqrt(), |_| 1.0)
    }

    pub fn mass(&self) -> f64 {
        self.s_integral(0.0, self.f.v_max(), |_| 1.0)
    }

    /// `E[V²] = ∫ u h(u) du`.
    pub fn mean(&self) -> f64 {
        self.s_integral(0.0, self.f.v_max(), |s| s * s)
    }

    /// `E[V⁴]`.
    pub fn second_moment(&self) -> f64 {
        self.s_integral(0.0, self.f.v_max(), |s| s.powi(4))
    }
}
