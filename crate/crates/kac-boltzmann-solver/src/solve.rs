use density_core::{moments, Grid, GridDensity};
use serde::{Deserialize, Serialize};

use crate::entropy::{entropy_h, entropy_production_dgamma};
use crate::error::SolverError;
use crate::kernel::CollisionKernelCache;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// `None` picks [`default_dt`].
    pub dt: Option<f64>,
    pub t_end: f64,
    pub gamma: f64,
    /// Angles on the smallest circles of the gain integral.
    pub theta_nodes: usize,
    /// Larger circles get one angle per this many grid cells of arc.
    pub arc_cells: f64,
    /// Project every right-hand side onto zero discrete mass and energy.
    pub conserve: bool,
    /// Values below this are clamped after each step.
    pub positivity_floor: f64,
    /// Allowed entropy increase per step.
    pub h_slack: f64,
    /// Times at which densities are stored; `0` and `t_end` are always added.
    pub sample_times: Vec<f64>,
    /// Evaluate `D_γ` at every sample.
    pub dissipation: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: None,
            t_end: 5.0,
            gamma: 0.0,
            theta_nodes: 64,
            arc_cells: 4.0,
            conserve: true,
            positivity_floor: 0.0,
            h_slack: 1e-10,
            sample_times: Vec::new(),
            dissipation: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidConfig(m));
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be finite and nonnegative, got {}", self.t_end));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        if self.theta_nodes < 64 {
            return bad(format!("theta_nodes must be >= 64, got {}", self.theta_nodes));
        }
        if !(self.positivity_floor >= 0.0) || !(self.h_slack >= 0.0) {
            return bad("positivity_floor and h_slack must be nonnegative".into());
        }
        if self.sample_times.iter().any(|t| !(*t >= 0.0 && *t <= self.t_end)) {
            return bad("sample times must lie in [0, t_end]".into());
        }
        Ok(())
    }
}

/// `0.1 / (1 + 2 m₂ 3^γ)`, a tenth of the inverse loss rate at `|v| ≈ 1`,
/// capped by the RK4 stability bound for the fastest loss rate on the grid,
/// `2 (1 + v_max² + m₂)^γ`.
pub fn default_dt(m2: f64, gamma: f64, v_max: f64) -> f64 {
    let heuristic = 0.1 / (1.0 + 2.0 * m2 * 3f64.powf(gamma));
    let fastest = 2.0 * (1.0 + v_max * v_max + m2).powf(gamma);
    heuristic.min(2.0 / fastest)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub t: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "D")]
    pub d: Option<f64>,
    pub mass: f64,
    pub energy: f64,
    pub m4: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: Grid,
    pub gamma: f64,
    pub dt: f64,
    pub records: Vec<SampleRecord>,
    /// Raw (unrenormalized) grid values at each sample.
    pub densities: Vec<Vec<f64>>,
    /// `(t, H)` after every step, starting with `t = 0`.
    pub h_steps: Vec<(f64, f64)>,
    /// Grid values raised to the positivity floor, summed over the run.
    pub clamped: usize,
}

impl Trajectory {
    pub fn density(&self, k: usize) -> Result<GridDensity, SolverError> {
        Ok(GridDensity::from_values(self.grid, self.densities[k].clone())?)
    }

    pub fn last(&self) -> Result<GridDensity, SolverError> {
        self.density(self.densities.len() - 1)
    }

    /// `H` at the stored step nearest to `t`.
    pub fn h_at(&self, t: f64) -> f64 {
        self.h_steps
            .iter()
            .min_by(|a, b| (a.0 - t).abs().partial_cmp(&(b.0 - t).abs()).unwrap())
            .map(|p| p.1)
            .unwrap_or(f64::NAN)
    }
}

/// `Q_γ f` with discrete mass and energy removed.
pub fn collision_q(f: &GridDensity, cache: &CollisionKernelCache) -> Result<Vec<f64>, SolverError> {
    if f.grid() != cache.grid() {
        return Err(SolverError::CacheMismatch);
    }
    cache.collision_q(f.values())
}

fn raw_moments(grid: &Grid, f: &[f64]) -> (f64, f64, f64) {
    let m0 = grid.integrate(f);
    let m2 = grid.integrate_with(|i, v| v * v * f[i]);
    let m4 = grid.integrate_with(|i, v| v.powi(4) * f[i]);
    (m0, m2, m4)
}

fn raw_entropy(grid: &Grid, f: &[f64]) -> Result<(GridDensity, f64), SolverError> {
    let g = GridDensity::from_values(*grid, f.to_vec())?;
    let h = entropy_h(&g)?;
    Ok((g, h))
}

pub fn solve(f0: &GridDensity, config: &SolverConfig) -> Result<Trajectory, SolverError> {
    config.validate()?;
    let cache = CollisionKernelCache::new(f0.grid(), config.gamma, config.theta_nodes, config.arc_cells)?;
    solve_with_cache(f0, config, &cache)
}

/// Classical RK4 from `f0` (unit mass and energy within 1e−8).
pub fn solve_with_cache(f0: &GridDensity, config: &SolverConfig, cache: &CollisionKernelCache) -> Result<Trajectory, SolverError> {
    config.validate()?;
    if !cache.matches(f0.grid(), config.gamma) {
        return Err(SolverError::CacheMismatch);
    }
    let grid = *f0.grid();
    let mass = f0.mass();
    let energy = f0.second_moment();
    if (mass - 1.0).abs() > 1e-8 || (energy - 1.0).abs() > 1e-8 {
        return Err(SolverError::NotNormalized { mass, energy });
    }
    let dt_max = config.dt.unwrap_or_else(|| default_dt(energy, config.gamma, grid.v_max));

    let mut stops: Vec<f64> = config.sample_times.clone();
    stops.push(0.0);
    stops.push(config.t_end);
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stops.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let rhs = |f: &[f64]| -> Vec<f64> {
        if config.conserve {
            cache.collision_q(f).expect("length checked")
        } else {
            let (g, l) = cache.gain_loss(f);
            g.iter().zip(&l).map(|(g, l)| g - l).collect()
        }
    };
    let record = |t: f64, f: &[f64], h: f64| -> Result<SampleRecord, SolverError> {
        let (m0, m2, m4) = raw_moments(&grid, f);
        let d = if config.dissipation {
            let g = GridDensity::from_values(grid, f.to_vec())?;
            Some(entropy_production_dgamma(&g, config.gamma, config.theta_nodes / 8 * 8)?.value)
        } else {
            None
        };
        Ok(SampleRecord { t, h, d, mass: m0, energy: m2, m4 })
    };

    let n = grid.n_points;
    let mut f = f0.values().to_vec();
    let mut h = entropy_h(f0)?;
    let mut t = 0.0;
    let mut step = 0usize;
    let mut clamped = 0usize;
    let mut records = vec![record(0.0, &f, h)?];
    let mut densities = vec![f.clone()];
    let mut h_steps = vec![(0.0, h)];
    let mut tmp = vec![0.0; n];
    let mut dt_used = dt_max;

    for w in stops.windows(2) {
        let span = w[1] - w[0];
        let steps = (span / dt_max - 1e-9).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        dt_used = dt_used.min(dt);
        for s in 0..steps {
            let k1 = rhs(&f);
            for i in 0..n {
                tmp[i] = f[i] + 0.5 * dt * k1[i];
            }
            let k2 = rhs(&tmp);
            for i in 0..n {
                tmp[i] = f[i] + 0.5 * dt * k2[i];
            }
            let k3 = rhs(&tmp);
            for i in 0..n {
                tmp[i] = f[i] + dt * k3[i];
            }
            let k4 = rhs(&tmp);
            for i in 0..n {
                f[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                if f[i] < config.positivity_floor {
                    f[i] = config.positivity_floor;
                    clamped += 1;
                }
            }
            step += 1;
            t = if s + 1 == steps { w[1] } else { w[0] + (s + 1) as f64 * dt };
            let (_, h_new) = raw_entropy(&grid, &f)?;
            if h_new > h + config.h_slack {
                return Err(SolverError::EntropyIncrease { step, t, increase: h_new - h });
            }
            h = h_new;
            h_steps.push((t, h));
        }
        records.push(record(t, &f, h)?);
        densities.push(f.clone());
    }
    if stops.len() == 1 {
        // t_end = 0: the single sample is the initial datum
        records.truncate(1);
        densities.truncate(1);
    }
    Ok(Trajectory { grid, gamma: config.gamma, dt: dt_used, records, densities, h_steps, clamped })
}

/// Running maxima of `M_k`, `k ∈ {2, 4, 6, 8}`, over the stored samples.
pub fn moment_history(traj: &Trajectory) -> Result<Vec<[f64; 4]>, SolverError> {
    let mut out = Vec::with_capacity(traj.densities.len());
    for k in 0..traj.densities.len() {
        let r = moments(&traj.density(k)?, &[1.0, 2.0, 3.0, 4.0], None)?;
        let mut row = [0.0; 4];
        for (slot, m) in row.iter_mut().zip(&r.m_2k) {
            *slot = m.value;
        }
        out.push(row);
    }
    Ok(out)
}
