//! Particle configurations on the energy sphere `S^{N−1}(√N)`.

use density_core::GridDensity;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::WalkError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub velocities: Vec<f64>,
    /// `Σ v_i²`, updated incrementally by collisions.
    pub energy_cache: f64,
}

impl ParticleState {
    /// Rescales `v` onto `S^{N−1}(√N)`.
    pub fn from_velocities(mut v: Vec<f64>) -> Result<Self, WalkError> {
        if v.len() < 2 {
            return Err(WalkError::InvalidConfig(format!("need at least two particles, got {}", v.len())));
        }
        let e: f64 = v.iter().map(|x| x * x).sum();
        if !(e > 0.0 && e.is_finite()) {
            return Err(WalkError::InvalidConfig("velocities must have positive finite energy".into()));
        }
        let s = (v.len() as f64 / e).sqrt();
        v.iter_mut().for_each(|x| *x *= s);
        let energy_cache = v.iter().map(|x| x * x).sum();
        Ok(ParticleState { velocities: v, energy_cache })
    }

    pub fn n(&self) -> usize {
        self.velocities.len()
    }

    pub fn energy(&self) -> f64 {
        self.velocities.iter().map(|x| x * x).sum()
    }

    pub fn momentum(&self) -> f64 {
        self.velocities.iter().sum()
    }

    /// Exact rescale back to energy `N`.
    pub fn renormalize(&mut self) {
        let s = (self.n() as f64 / self.energy()).sqrt();
        self.velocities.iter_mut().for_each(|x| *x *= s);
        self.energy_cache = self.energy();
    }

    /// Empirical `Σ v_i^p / N`.
    pub fn moment(&self, p: i32) -> f64 {
        self.velocities.iter().map(|x| x.powi(p)).sum::<f64>() / self.n() as f64
    }
}

/// `(v_i, v_j) ← (v_i cos θ + v_j sin θ, −v_i sin θ + v_j cos θ)`.
pub fn collision_rotate(state: &mut ParticleState, i: usize, j: usize, theta: f64) -> Result<(), WalkError> {
    if i == j {
        return Err(WalkError::SameParticle(i));
    }
    let n = state.n();
    if i >= n || j >= n {
        return Err(WalkError::InvalidConfig(format!("particle index out of range for N = {n}")));
    }
    rotate_unchecked(state, i, j, theta);
    Ok(())
}

#[inline]
pub(crate) fn rotate_unchecked(state: &mut ParticleState, i: usize, j: usize, theta: f64) {
    let (s, c) = theta.sin_cos();
    let (a, b) = (state.velocities[i], state.velocities[j]);
    let (x, y) = (a * c + b * s, -a * s + b * c);
    state.energy_cache += (x * x + y * y) - (a * a + b * b);
    state.velocities[i] = x;
    state.velocities[j] = y;
}

/// Inverse-CDF sampler for the piecewise-linear interpolant of `f` between
/// grid nodes (whose mass is the trapezoid mass).
#[derive(Clone, Debug)]
pub struct InverseCdf {
    nodes: Vec<f64>,
    values: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdf {
    pub fn new(f: &GridDensity) -> Self {
        let grid = f.grid();
        let nodes = grid.nodes();
        let values = f.values().to_vec();
        let h = grid.spacing();
        let mut cdf = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for k in 1..nodes.len() {
            acc += 0.5 * h * (values[k - 1] + values[k]);
            cdf.push(acc);
        }
        let total = acc;
        cdf.iter_mut().for_each(|c| *c /= total);
        InverseCdf { nodes, values, cdf }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let x0 = self.nodes[k - 1];
        let h = self.nodes[k] - x0;
        if c1 <= c0 {
            return x0;
        }
        // solve ∫₀^s (f0 + (f1 − f0) y/h) dy = (u − c0)/(c1 − c0) · cell mass
        let (f0, f1) = (self.values[k - 1], self.values[k]);
        let target = (u - c0) / (c1 - c0) * 0.5 * h * (f0 + f1);
        let slope = (f1 - f0) / h;
        let s = if slope.abs() < 1e-14 * (f0 + f1).max(1e-300) / h {
            target / f0.max(1e-300)
        } else {
            // stable root of ½ slope s² + f0 s − target = 0
            2.0 * target / (f0 + (f0 * f0 + 2.0 * slope * target).max(0.0).sqrt())
        };
        x0 + s.clamp(0.0, h)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }
}

/// `N` i.i.d. draws from `f`, rescaled onto `S^{N−1}(√N)`.
pub fn sample_chaotic_initial<R: Rng + ?Sized>(f: &GridDensity, n: usize, rng: &mut R) -> Result<ParticleState, WalkError> {
    let m2 = f.second_moment();
    if (m2 - 1.0).abs() > 1e-6 {
        return Err(WalkError::NotUnitEnergy(m2));
    }
    let inv = InverseCdf::new(f);
    loop {
        let v: Vec<f64> = (0..n).map(|_| inv.sample(rng)).collect();
        if v.iter().any(|x| *x != 0.0) || n < 2 {
            return ParticleState::from_velocities(v);
        }
    }
}

/// Metropolis chain on the sphere targeting the conditioned tensor law of
/// `f`: proposals are random collisions (symmetric for the uniform measure),
/// accepted with `f(v_i')f(v_j') / (f(v_i)f(v_j))`. Returns the acceptance
/// fraction.
pub fn metropolis_sweeps<R: Rng + ?Sized>(f: &GridDensity, state: &mut ParticleState, sweeps: usize, rng: &mut R) -> f64 {
    let n = state.n();
    let mut accepted = 0usize;
    let total = sweeps * n;
    for _ in 0..total {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let (a, b) = (state.velocities[i], state.velocities[j]);
        let (s, c) = theta.sin_cos();
        let (x, y) = (a * c + b * s, -a * s + b * c);
        let log_ratio = f.ln_eval(x) + f.ln_eval(y) - f.ln_eval(a) - f.ln_eval(b);
        if log_ratio >= 0.0 || rng.gen::<f64>().ln() < log_ratio {
            rotate_unchecked(state, i, j, theta);
            accepted += 1;
        }
    }
    accepted as f64 / total.max(1) as f64
}
