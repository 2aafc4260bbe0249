//! The log-ratio `φ = ln f − ln M_1` and the one- and two-particle sphere
//! averages of `e^φ` that seed every convolution power.
//!
//! For a unit-energy `f`, `f^{⊗m} = M_1^{⊗m} e^{Σφ(v_i)}` and `M_1^{⊗m}` is
//! constant on spheres, so
//!
//! `ln Z_m(f, √u) = −(m/2) ln 2π − u/2 + ln A_m(u)`,
//!
//! where `A_m(u)` is the uniform average of `e^{Σφ}` over `S^{m−1}(√u)`.
//! Equivalently `A_m = h^{*m} / χ²_m`.

use std::f64::consts::PI;

use density_core::special::{ln_mean_exp2, LogSum};
use density_core::GridDensity;

pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Z_m(M_1, √u)`: the Maxwellian part of the normalization function.
#[inline]
pub fn ln_z_maxwellian(m: usize, u: f64) -> f64 {
    -(m as f64) * HALF_LN_2PI - 0.5 * u
}

#[derive(Clone, Debug)]
pub struct Phi {
    f: GridDensity,
    v_max: f64,
}

impl Phi {
    pub fn new(f: &GridDensity) -> Self {
        Phi { f: f.clone(), v_max: f.v_max() }
    }

    pub fn density(&self) -> &GridDensity {
        &self.f
    }

    /// `φ(v)`; `−∞` off the grid.
    #[inline]
    pub fn phi(&self, v: f64) -> f64 {
        if v.abs() > self.v_max * (1.0 + 1e-14) {
            return f64::NEG_INFINITY;
        }
        self.f.ln_eval(v) + 0.5 * v * v + HALF_LN_2PI
    }

    /// `ln A_1(w) = ln ½(e^{φ(√w)} + e^{φ(−√w)})`.
    #[inline]
    pub fn ln_a1(&self, w: f64) -> f64 {
        let r = w.max(0.0).sqrt();
        ln_mean_exp2(self.phi(r), self.phi(-r))
    }

    /// `ln A_2(w)` by the periodic trapezoid rule on the circle of radius
    /// `√w`, with a node every two grid cells of arc length.
    pub fn ln_a2(&self, w: f64) -> f64 {
        let r = w.max(0.0).sqrt();
        let cells = (PI * r / self.f.spacing()).ceil() as usize;
        let n = 4 * ((cells.max(64) + 3) / 4);
        ln_circle_mean(self, r, n)
    }
}

/// `ln (1/n) Σ_l e^{φ(r cos α_l) + φ(r sin α_l)}` with `n` divisible by 4.
pub fn ln_circle_mean(phi: &Phi, r: f64, n: usize) -> f64 {
    debug_assert_eq!(n % 4, 0);
    let c: Vec<f64> = (0..n).map(|l| phi.phi(r * (2.0 * PI * l as f64 / n as f64).cos())).collect();
    let quarter = n / 4;
    let mut acc = LogSum::new();
    for l in 0..n {
        // sin α_l = cos α_{l − n/4}
        acc.add(c[l] + c[(l + 3 * quarter) % n]);
    }
    acc.value() - (n as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use density_core::{maxwellian, Grid};

    #[test]
    fn maxwellian_ratio_is_flat() {
        let m = maxwellian(1.0, &Grid::default()).unwrap();
        let p = Phi::new(&m);
        for v in [-8.0, -1.0, 0.0, 0.3, 5.0] {
            // six-point interpolation of a Gaussian: ~1e-9 relative at |v| = 8
            assert!(p.phi(v).abs() < 1e-8, "v = {v}: {}", p.phi(v));
        }
        assert!(p.ln_a2(3.0).abs() < 1e-12);
        assert_eq!(p.phi(10.5), f64::NEG_INFINITY);
    }
}
