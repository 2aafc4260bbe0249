//! The collision operator
//!
//! `Q_γ f(v) = (1/π) ∫_{−π}^{π} ∫ (1+v²+w²)^γ [f(v')f(w') − f(v)f(w)] dw dθ`.
//!
//! Rotations keep `ρ² = v² + w²` fixed and sweep the whole circle, so the
//! gain part only sees the circle integral `C(ρ) = ∮ f(ρ cos β) f(ρ sin β) dβ`:
//!
//! `Q⁺(v) = (1/π) ∫ (1+ρ²)^γ C(ρ) dw`, `Q⁻(v) = 2 f(v) ∫ (1+v²+w²)^γ f(w) dw`.
//!
//! `C` is computed on a uniform radial grid by the periodic trapezoid rule,
//! then read back at every `ρ_ij = √(v_i² + w_j²)`. All interpolation
//! stencils depend only on the grid and are built once.

use std::f64::consts::PI;

use density_core::grid::{lagrange6, stencil_at, STENCIL};
use density_core::Grid;

use crate::error::SolverError;

#[derive(Clone, Copy, Debug)]
struct Tap {
    base: u32,
    w: [f64; STENCIL],
}

impl Tap {
    #[inline]
    fn apply(&self, y: &[f64]) -> f64 {
        let s = &y[self.base as usize..self.base as usize + STENCIL];
        self.w[0] * s[0] + self.w[1] * s[1] + self.w[2] * s[2] + self.w[3] * s[3] + self.w[4] * s[4] + self.w[5] * s[5]
    }
}

/// Off-grid points read zeros through this tap.
const ZERO_TAP: Tap = Tap { base: 0, w: [0.0; STENCIL] };

/// One circle of the radial grid: `n` angles; taps for `f(ρ cos β_l)`,
/// `l = 0..=n/2`.
#[derive(Clone, Debug)]
struct Circle {
    n: usize,
    taps: Vec<Tap>,
}

#[derive(Clone, Debug)]
pub struct CollisionKernelCache {
    grid: Grid,
    gamma: f64,
    /// Smallest number of angles on any circle.
    pub theta_nodes: usize,
    circles: Vec<Circle>,
    /// `(1+ρ_k²)^γ`.
    k_rho: Vec<f64>,
    /// Taps into the radial grid for `ρ_ab = h√(a² + b²)`, `0 ≤ a ≤ b`,
    /// row-major in `a`.
    pair_taps: Vec<Tap>,
    half: usize,
    /// `w_j (1 + v_i² + w_j²)^γ`, row-major (only for `γ > 0`).
    loss_matrix: Vec<f64>,
}

impl CollisionKernelCache {
    /// `theta_nodes` is the angle count on the smallest circles; larger
    /// circles get one angle per `arc_cells` grid cells of arc.
    pub fn new(grid: &Grid, gamma: f64, theta_nodes: usize, arc_cells: f64) -> Result<Self, SolverError> {
        grid.validate()?;
        if !(0.0..=1.0).contains(&gamma) {
            return Err(SolverError::InvalidConfig(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        if theta_nodes < 64 || theta_nodes % 4 != 0 {
            return Err(SolverError::InvalidConfig(format!("theta_nodes must be >= 64 and divisible by 4, got {theta_nodes}")));
        }
        if !(arc_cells > 0.0) {
            return Err(SolverError::InvalidConfig(format!("arc_cells must be positive, got {arc_cells}")));
        }
        if grid.zero_index().is_none() {
            return Err(SolverError::InvalidConfig("the collision cache needs a grid node at v = 0".into()));
        }
        let h = grid.spacing();
        let n_pts = grid.n_points;
        let drho = h;
        let half = (n_pts - 1) / 2;
        let rho_top = grid.v_max * 2f64.sqrt();
        let n_rho = (rho_top / drho).ceil() as usize + STENCIL + 1;
        let tap_v = |x: f64| -> Tap {
            grid.stencil(x).map_or(ZERO_TAP, |s| Tap { base: s.base as u32, w: s.weights })
        };
        let mut circles = Vec::with_capacity(n_rho);
        for k in 0..n_rho {
            let rho = k as f64 * drho;
            let want = (2.0 * PI * rho / (arc_cells * h)).ceil() as usize;
            let n = 4 * ((want.max(theta_nodes) + 3) / 4);
            let taps = (0..=n / 2).map(|l| tap_v(rho * (2.0 * PI * l as f64 / n as f64).cos())).collect();
            circles.push(Circle { n, taps });
        }
        let k_rho = (0..n_rho).map(|k| (1.0 + (k as f64 * drho).powi(2)).powf(gamma)).collect();
        let mut pair_taps = Vec::with_capacity((half + 1) * (half + 2) / 2);
        for a in 0..=half {
            for b in a..=half {
                let x = h * ((a * a + b * b) as f64).sqrt() / drho;
                let s = stencil_at(x, n_rho);
                pair_taps.push(Tap { base: s.base as u32, w: lagrange6(x - s.base as f64) });
            }
        }
        let loss_matrix = if gamma == 0.0 {
            Vec::new()
        } else {
            let mut m = Vec::with_capacity(n_pts * n_pts);
            for i in 0..n_pts {
                let v = grid.node(i);
                for j in 0..n_pts {
                    let w = grid.node(j);
                    m.push(grid.weight(j) * (1.0 + v * v + w * w).powf(gamma));
                }
            }
            m
        };
        Ok(CollisionKernelCache { grid: *grid, gamma, theta_nodes, circles, k_rho, pair_taps, half, loss_matrix })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn matches(&self, grid: &Grid, gamma: f64) -> bool {
        self.grid == *grid && self.gamma == gamma
    }

    /// `C(ρ_k)` for every radius, from `√f` on the grid.
    pub fn circle_integrals(&self, roots: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.circles.len());
        let mut vals = Vec::new();
        for c in &self.circles {
            let n = c.n;
            let q = n / 4;
            vals.clear();
            vals.extend(c.taps.iter().map(|t| {
                let r = t.apply(roots);
                r * r
            }));
            // cos β_{n−l} = cos β_l
            for l in n / 2 + 1..n {
                vals.push(vals[n - l]);
            }
            // sin β_l = cos β_{l − n/4}
            let mut acc = 0.0;
            for l in 0..q {
                acc += vals[l] * vals[l + 3 * q];
            }
            for l in q..n {
                acc += vals[l] * vals[l - q];
            }
            out.push(acc * 2.0 * PI / n as f64);
        }
        out
    }

    /// Gain and loss parts `(Q⁺, Q⁻)` on the grid.
    pub fn gain_loss(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.n_points;
        let roots: Vec<f64> = f.iter().map(|x| x.max(0.0).sqrt()).collect();
        let c = self.circle_integrals(&roots);
        let kc: Vec<f64> = c.iter().zip(&self.k_rho).map(|(c, k)| c * k).collect();
        let h = self.grid.spacing();
        // trapezoid over w ∈ [−v_max, v_max], symmetric in w; the pair
        // radius is symmetric in (a, b), so each tap feeds both rows
        let edge = |b: usize| if b == 0 || b == self.half { 0.5 } else { 1.0 };
        let mut gain_half = vec![0.0; self.half + 1];
        let mut taps = self.pair_taps.iter();
        for a in 0..=self.half {
            let wa = edge(a);
            for b in a..=self.half {
                let val = taps.next().expect("tap table sized at construction").apply(&kc);
                gain_half[a] += edge(b) * val;
                if b != a {
                    gain_half[b] += wa * val;
                }
            }
        }
        for g in gain_half.iter_mut() {
            *g *= 2.0 * h / PI;
        }
        let gain: Vec<f64> = (0..n).map(|i| gain_half[i.abs_diff(self.half)]).collect();
        let loss: Vec<f64> = if self.gamma == 0.0 {
            let mass = self.grid.integrate(f);
            f.iter().map(|x| 2.0 * x * mass).collect()
        } else {
            (0..n)
                .map(|i| {
                    let row = &self.loss_matrix[i * n..(i + 1) * n];
                    2.0 * f[i] * row.iter().zip(f).map(|(k, y)| k * y).sum::<f64>()
                })
                .collect()
        };
        (gain, loss)
    }

    /// `Q_γ f` on the grid, projected so that its discrete mass and energy
    /// vanish exactly.
    pub fn collision_q(&self, f: &[f64]) -> Result<Vec<f64>, SolverError> {
        if f.len() != self.grid.n_points {
            return Err(SolverError::CacheMismatch);
        }
        let (gain, loss) = self.gain_loss(f);
        let mut q: Vec<f64> = gain.iter().zip(&loss).map(|(g, l)| g - l).collect();
        project_conservative(&self.grid, f, &mut q);
        Ok(q)
    }
}

/// Subtracts `αf + βv²f` so that `Σ w_i q_i = Σ w_i v_i² q_i = 0`.
pub fn project_conservative(grid: &Grid, f: &[f64], q: &mut [f64]) {
    let (mut m0, mut m2, mut m4, mut r0, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..grid.n_points {
        let w = grid.weight(i);
        let v2 = grid.node(i).powi(2);
        m0 += w * f[i];
        m2 += w * v2 * f[i];
        m4 += w * v2 * v2 * f[i];
        r0 += w * q[i];
        r2 += w * v2 * q[i];
    }
    let det = m0 * m4 - m2 * m2;
    if det.abs() < 1e-300 {
        return;
    }
    let alpha = (r0 * m4 - r2 * m2) / det;
    let beta = (m0 * r2 - m2 * r0) / det;
    for i in 0..grid.n_points {
        q[i] -= (alpha + beta * grid.node(i).powi(2)) * f[i];
    }
}
