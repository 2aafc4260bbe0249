//! Convolution powers `h^{*m}` by FFT on a lattice in `u`.
//!
//! The law of `V²` is discretised into exact cell masses on `[jΔ, (j+1)Δ)`.
//! The `m`-th power of the mass vector's transform gives the law of the sum
//! of cell indices; the sum itself is offset by about `m/2` cells. Accuracy is
//! `O(Δ²)`, which makes this a cross-check for the sphere tables rather than
//! a production route.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use density_core::grid::stencil_at;
use density_core::GridDensity;

use crate::energy_law::EnergyLawDensity;
use crate::error::SphereError;

#[derive(Clone, Debug)]
pub struct FftPower {
    pub m: usize,
    pub du: f64,
    /// Lattice probabilities of the index sum.
    pub mass: Vec<f64>,
}

impl FftPower {
    pub fn new(f: &GridDensity, m: usize, du: f64) -> Result<Self, SphereError> {
        if m == 0 || !(du > 0.0) {
            return Err(SphereError::InvalidParameter(format!("need m >= 1 and du > 0, got ({m}, {du})")));
        }
        let law = EnergyLawDensity::new(f)?;
        let mean = law.mean();
        let var = law.second_moment() - mean * mean;
        let span = m as f64 * mean + 40.0 * (m as f64 * var).sqrt() + 20.0 * du * m as f64;
        let len = ((span / du).ceil() as usize).next_power_of_two().max(64);
        let cells = ((law.u_max() / du).ceil() as usize).min(len);
        let mut buf: Vec<Complex64> = (0..len)
            .map(|j| if j < cells { Complex64::new(law.cell_mass(j as f64 * du, (j + 1) as f64 * du), 0.0) } else { Complex64::new(0.0, 0.0) })
            .collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(len).process(&mut buf);
        for z in buf.iter_mut() {
            *z = z.powu(m as u32);
        }
        planner.plan_fft_inverse(len).process(&mut buf);
        let mass = buf.iter().map(|z| (z.re / len as f64).max(0.0)).collect();
        Ok(FftPower { m, du, mass })
    }

    /// `h^{*m}(u)` by interpolating the lattice law at index `u/Δ − m/2`.
    pub fn density(&self, u: f64) -> f64 {
        let x = u / self.du - 0.5 * self.m as f64;
        let last = (self.mass.len() - 1) as f64;
        if !(0.0..=last).contains(&x) {
            return 0.0;
        }
        let s = stencil_at(x, self.mass.len());
        (s.apply(&self.mass) / self.du).max(0.0)
    }
}
