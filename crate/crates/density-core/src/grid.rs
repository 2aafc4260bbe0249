//! Uniform symmetric velocity grids and the interpolation stencil used to
//! evaluate grid densities between nodes.

use serde::{Deserialize, Serialize};

use crate::error::DensityError;

pub const DEFAULT_V_MAX: f64 = 10.0;
pub const DEFAULT_POINTS: usize = 1025;

/// Number of nodes in an interpolation stencil (quintic Lagrange).
pub const STENCIL: usize = 6;

const LAGRANGE_DENOM: [f64; STENCIL] = [-120.0, 24.0, -12.0, 12.0, -24.0, 120.0];

/// A grid `v_i = -v_max + i * h` with `h = 2 v_max / (n_points - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub v_max: f64,
    pub n_points: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { v_max: DEFAULT_V_MAX, n_points: DEFAULT_POINTS }
    }
}

/// Interpolation weights for six consecutive nodes starting at `base`.
#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    pub base: usize,
    pub weights: [f64; STENCIL],
}

impl Stencil {
    #[inline]
    pub fn apply(&self, values: &[f64]) -> f64 {
        let s = &values[self.base..self.base + STENCIL];
        self.weights[0] * s[0]
            + self.weights[1] * s[1]
            + self.weights[2] * s[2]
            + self.weights[3] * s[3]
            + self.weights[4] * s[4]
            + self.weights[5] * s[5]
    }
}

/// Lagrange weights on nodes 0..6 evaluated at local coordinate `y`.
#[inline]
pub fn lagrange6(y: f64) -> [f64; STENCIL] {
    let d = [y, y - 1.0, y - 2.0, y - 3.0, y - 4.0, y - 5.0];
    let mut prefix = [1.0; STENCIL];
    for j in 1..STENCIL {
        prefix[j] = prefix[j - 1] * d[j - 1];
    }
    let mut w = [0.0; STENCIL];
    let mut suffix = 1.0;
    for j in (0..STENCIL).rev() {
        w[j] = prefix[j] * suffix / LAGRANGE_DENOM[j];
        suffix *= d[j];
    }
    w
}

/// Stencil for fractional index `x` on an array of `len >= 6` samples.
/// The stencil is centred on the cell containing `x` and shifted inwards at
/// the array ends.
#[inline]
pub fn stencil_at(x: f64, len: usize) -> Stencil {
    let cell = (x.floor().max(0.0) as usize).min(len - 2);
    let base = cell.saturating_sub(2).min(len - STENCIL);
    Stencil { base, weights: lagrange6(x - base as f64) }
}

impl Grid {
    pub fn new(v_max: f64, n_points: usize) -> Result<Self, DensityError> {
        if !(v_max.is_finite() && v_max > 0.0) {
            return Err(DensityError::InvalidGrid(format!("v_max must be positive, got {v_max}")));
        }
        if n_points < 2 * STENCIL {
            return Err(DensityError::InvalidGrid(format!(
                "need at least {} points, got {n_points}",
                2 * STENCIL
            )));
        }
        Ok(Grid { v_max, n_points })
    }

    pub fn validate(&self) -> Result<(), DensityError> {
        Grid::new(self.v_max, self.n_points).map(|_| ())
    }

    pub fn v_min(&self) -> f64 {
        -self.v_max
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.v_max / (self.n_points - 1) as f64
    }

    /// Node `i`; computed so that `node(n-1-i) == -node(i)` exactly.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        let twice = 2 * i as i64 - (self.n_points as i64 - 1);
        self.v_max * (twice as f64 / (self.n_points - 1) as f64)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n_points {
            0.5 * self.spacing()
        } else {
            self.spacing()
        }
    }

    /// Composite trapezoid rule, summed in index order.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        let h = self.spacing();
        let n = values.len();
        let inner: f64 = values[1..n - 1].iter().sum();
        h * (inner + 0.5 * (values[0] + values[n - 1]))
    }

    pub fn integrate_with<F: FnMut(usize, f64) -> f64>(&self, mut g: F) -> f64 {
        let h = self.spacing();
        let n = self.n_points;
        let mut acc = 0.5 * (g(0, self.node(0)) + g(n - 1, self.node(n - 1)));
        for i in 1..n - 1 {
            acc += g(i, self.node(i));
        }
        h * acc
    }

    /// Interpolation stencil at `v`, or `None` outside `[-v_max, v_max]`.
    #[inline]
    pub fn stencil(&self, v: f64) -> Option<Stencil> {
        let x = v / self.spacing() + 0.5 * (self.n_points - 1) as f64;
        let last = (self.n_points - 1) as f64;
        if !(x >= -1e-9 && x <= last + 1e-9) {
            return None;
        }
        Some(stencil_at(x.clamp(0.0, last), self.n_points))
    }

    /// Index of the node at `v = 0`, if the grid has one.
    pub fn zero_index(&self) -> Option<usize> {
        (self.n_points % 2 == 1).then_some(self.n_points / 2)
    }

    /// Range of nodes with index `>= mid`: the nonnegative half of the grid.
    pub fn nonnegative_start(&self) -> usize {
        self.n_points / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_antisymmetric() {
        for n in [12, 1024, 1025] {
            let g = Grid::new(7.5, n).unwrap();
            for i in 0..n {
                assert_eq!(g.node(n - 1 - i), -g.node(i));
            }
            assert_eq!(g.node(0), -7.5);
            assert_eq!(g.node(n - 1), 7.5);
        }
    }

    #[test]
    fn stencil_reproduces_quintics() {
        let g = Grid::new(3.0, 61).unwrap();
        let p = |v: f64| 1.0 - 2.0 * v + 0.5 * v.powi(3) - 0.1 * v.powi(5);
        let samples: Vec<f64> = g.nodes().into_iter().map(p).collect();
        for k in 0..200 {
            let v = -3.0 + 6.0 * k as f64 / 199.0;
            let s = g.stencil(v).unwrap();
            let sum: f64 = s.weights.iter().sum();
            assert!((sum - 1.0).abs() < 1e-13);
            assert!((s.apply(&samples) - p(v)).abs() < 1e-10, "v = {v}");
        }
        assert!(g.stencil(3.01).is_none());
    }

    #[test]
    fn stencil_is_exact_at_nodes() {
        let g = Grid::default();
        let samples: Vec<f64> = (0..g.n_points).map(|i| (i as f64).sin()).collect();
        for i in [0, 1, 2, 500, 512, 1022, 1024] {
            let s = g.stencil(g.node(i)).unwrap();
            assert!((s.apply(&samples) - samples[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(-1.0, 100).is_err());
        assert!(Grid::new(1.0, 5).is_err());
    }
}
