use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::DensityError;
use crate::grid::Grid;

/// Floor applied inside logarithms.
pub const FLOOR: f64 = 1e-300;
/// Allowed deviation of the trapezoid mass from 1 after normalization.
pub const TOL_MASS: f64 = 1e-10;

/// ln max(x, FLOOR).
#[inline]
pub fn ln_floor(x: f64) -> f64 {
    x.max(FLOOR).ln()
}

/// Declared analytic tail of a density: `C1 e^{-a1 v²} <= f(v) <= C2 e^{a2 v²}`,
/// optionally with a decay rate `f(v) = O(e^{-a |v|^mu})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailModel {
    #[serde(rename = "C1")]
    pub c1: f64,
    pub a1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub a2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
}

impl TailModel {
    pub fn lower(&self, v: f64) -> f64 {
        self.c1 * (-self.a1 * v * v).exp()
    }

    pub fn upper(&self, v: f64) -> f64 {
        self.c2 * (self.a2 * v * v).exp()
    }

    /// `true` if the declared bounds say `∫ e^{a|v|^mu} f` is infinite.
    pub fn exp_moment_diverges(&self, a: f64, mu: f64) -> bool {
        self.c1 > 0.0 && (mu > 2.0 || (mu == 2.0 && a >= self.a1))
    }

    /// `true` if the declared decay guarantees `∫ e^{a|v|^mu} f < ∞`.
    pub fn exp_moment_converges(&self, a: f64, mu: f64) -> bool {
        match (self.mu, self.a) {
            (Some(m), Some(b)) => mu < m || (mu == m && a < b),
            _ => false,
        }
    }
}

/// A probability density sampled on a uniform symmetric grid.
///
/// Between nodes the density is evaluated as the square of the quintic
/// Lagrange interpolant of `sqrt(f)`, so evaluations are never negative.
/// Outside the grid the density is zero.
#[derive(Clone, Debug)]
pub struct GridDensity {
    grid: Grid,
    values: Vec<f64>,
    roots: Vec<f64>,
    tail: Option<TailModel>,
}

impl GridDensity {
    /// Validates the samples and rescales them to unit trapezoid mass.
    pub fn from_values(grid: Grid, mut values: Vec<f64>) -> Result<Self, DensityError> {
        grid.validate()?;
        if values.len() != grid.n_points {
            return Err(DensityError::InvalidGrid(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.n_points
            )));
        }
        for (index, &value) in values.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(DensityError::InvalidSample { index, value });
            }
        }
        let mass = grid.integrate(&values);
        if !(mass > 0.0) {
            return Err(DensityError::ZeroMass);
        }
        for x in &mut values {
            *x /= mass;
        }
        let roots = values.iter().map(|x| x.sqrt()).collect();
        Ok(GridDensity { grid, values, roots, tail: None })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Grid, f: F) -> Result<Self, DensityError> {
        let values = grid.nodes().into_iter().map(f).collect();
        Self::from_values(grid, values)
    }

    pub fn with_tail(mut self, tail: TailModel) -> Self {
        self.tail = Some(tail);
        self
    }

    pub fn tail_model(&self) -> Option<&TailModel> {
        self.tail.as_ref()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn v_min(&self) -> f64 {
        self.grid.v_min()
    }

    pub fn v_max(&self) -> f64 {
        self.grid.v_max
    }

    pub fn n_points(&self) -> usize {
        self.grid.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    /// Interpolated density value (zero outside the grid).
    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        match self.grid.stencil(v) {
            Some(s) => {
                let r = s.apply(&self.roots);
                r * r
            }
            None => 0.0,
        }
    }

    /// ln of the interpolated value with the positivity floor.
    #[inline]
    pub fn ln_eval(&self, v: f64) -> f64 {
        ln_floor(self.eval(v))
    }

    pub fn mass(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    pub fn second_moment(&self) -> f64 {
        absolute_moment(self, 2.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Checks the declared tail bounds at every node.
    pub fn validate_tail(&self) -> Result<(), DensityError> {
        let tail = self.tail.as_ref().ok_or_else(|| DensityError::InvalidParameter("no tail model declared".into()))?;
        validate_tail_bounds(self, tail)
    }

    pub fn same_grid(&self, other: &GridDensity) -> bool {
        self.grid == other.grid
    }
}

/// Checks `C1 e^{-a1 v²} <= f(v) <= C2 e^{a2 v²}` at every node, with a
/// relative slack of 1e-9 for the renormalization roundoff. Lower bounds that
/// fall below the floor are not enforced.
pub fn validate_tail_bounds(f: &GridDensity, tail: &TailModel) -> Result<(), DensityError> {
    let slack = 1e-9;
    for (i, &value) in f.values.iter().enumerate() {
        let v = f.grid.node(i);
        let lo = tail.lower(v);
        if lo > FLOOR && value < lo * (1.0 - slack) {
            return Err(DensityError::TailViolation { v, value, bound: lo, side: "lower" });
        }
        let hi = tail.upper(v);
        if value > hi * (1.0 + slack) {
            return Err(DensityError::TailViolation { v, value, bound: hi, side: "upper" });
        }
    }
    Ok(())
}

/// Centred Maxwellian `M_T` sampled on `grid`.
pub fn maxwellian(t: f64, grid: &Grid) -> Result<GridDensity, DensityError> {
    if !(t.is_finite() && t > 0.0) {
        return Err(DensityError::InvalidParameter(format!("temperature must be positive, got {t}")));
    }
    let lost = erfc(grid.v_max / (2.0 * t).sqrt());
    if lost > TOL_MASS {
        return Err(DensityError::GridTooNarrow { lost, tol: TOL_MASS });
    }
    let norm = (2.0 * std::f64::consts::PI * t).sqrt();
    let c = 1.0 / norm;
    let f = GridDensity::from_fn(*grid, |v| c * (-v * v / (2.0 * t)).exp())?;
    Ok(f.with_tail(TailModel { c1: c, a1: 0.5 / t, c2: c, a2: 0.0, mu: Some(2.0), a: Some(0.5 / t) }))
}

/// Relative entropy `∫ f (ln f − ln g)`.
///
/// Summed termwise as `g (r ln r − r + 1)` with `r = f / g`, each term being
/// nonnegative, so the result is exactly zero for identical samples and never
/// negative.
pub fn relative_entropy(f: &GridDensity, g: &GridDensity) -> Result<f64, DensityError> {
    if !f.same_grid(g) {
        return Err(DensityError::GridMismatch);
    }
    let grid = f.grid;
    let mut acc = 0.0;
    for i in 0..grid.n_points {
        let fi = f.values[i];
        if fi <= FLOOR {
            continue;
        }
        let gi = g.values[i];
        if gi <= FLOOR {
            return Err(DensityError::SupportMismatch { v: grid.node(i), value: fi });
        }
        let r = gi / fi;
        let term = if fi == gi {
            0.0
        } else if (0.5..2.0).contains(&r) {
            // f (d − ln(1 + d)) = f ln(f/g) − f + g, without cancellation
            let d = r - 1.0;
            fi * (d - d.ln_1p()).max(0.0)
        } else {
            (fi * (fi.ln() - gi.ln()) - fi + gi).max(0.0)
        };
        acc += grid.weight(i) * term;
    }
    Ok(acc)
}

pub fn l1_distance(f: &GridDensity, g: &GridDensity) -> Result<f64, DensityError> {
    if !f.same_grid(g) {
        return Err(DensityError::GridMismatch);
    }
    Ok(f.grid.integrate_with(|i, _| (f.values[i] - g.values[i]).abs()))
}

/// `(H(f|g), ½ ‖f − g‖₁²)`.
pub fn pinsker_gap(f: &GridDensity, g: &GridDensity) -> Result<(f64, f64), DensityError> {
    let h = relative_entropy(f, g)?;
    let d = l1_distance(f, g)?;
    Ok((h, 0.5 * d * d))
}

/// `∫ |v|^p f`.
pub fn absolute_moment(f: &GridDensity, p: f64) -> f64 {
    let g = |i: usize, v: f64| weight_pow(v, p) * f.values[i];
    if is_even_integer(p) {
        f.grid.integrate_with(g)
    } else {
        f.grid.integrate_with(g) + kink_correction(f, g)
    }
}

/// `|v|^p` is smooth at 0 exactly when `p` is an even integer.
fn is_even_integer(p: f64) -> bool {
    p >= 0.0 && (p / 2.0).fract() == 0.0
}

/// Euler–Maclaurin term for an integrand with a derivative jump at the
/// node `v = 0` (weights in `|v|`): `(h²/12)(g'(0+) − g'(0−))`, with
/// fourth-order one-sided differences. Zero for grids without a node at 0.
fn kink_correction<G: Fn(usize, f64) -> f64>(f: &GridDensity, g: G) -> f64 {
    const D: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let Some(z) = f.grid.zero_index() else { return 0.0 };
    let h = f.grid.spacing();
    let mut jump = 0.0;
    for (k, d) in D.iter().enumerate() {
        jump += d * (g(z + k, f.grid.node(z + k)) + g(z - k, f.grid.node(z - k)));
    }
    h * jump / 144.0
}

#[inline]
fn weight_pow(v: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        v.abs().powf(p)
    }
}

/// A single moment with its diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentValue {
    pub order: f64,
    pub value: f64,
    /// The declared tail makes the moment infinite.
    pub divergent: bool,
    /// More than 10% of the value comes from the outer tenth of the grid.
    pub truncation_warning: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpMoment {
    pub a: f64,
    pub mu: f64,
    pub value: f64,
    pub divergent: bool,
    pub truncation_warning: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mass: f64,
    pub m2: f64,
    pub m4: f64,
    /// `∫ |v|^{2k} f` for each requested `k` (`order` holds `2k`).
    pub m_2k: Vec<MomentValue>,
    pub m_exp: Option<ExpMoment>,
    pub fisher: f64,
    pub l_log_l: f64,
}

impl MomentReport {
    pub fn moment(&self, order: f64) -> Option<f64> {
        self.m_2k.iter().find(|m| m.order == order).map(|m| m.value)
    }
}

fn moment_with_warning<W: Fn(f64) -> f64>(f: &GridDensity, w: W, smooth: bool) -> (f64, bool) {
    let cut = 0.9 * f.grid.v_max;
    let mut outer = 0.0;
    let total = f.grid.integrate_with(|i, v| {
        let c = w(v) * f.values[i];
        if v.abs() > cut {
            outer += f.grid.weight(i) * c;
        }
        c
    });
    let total = if smooth { total } else { total + kink_correction(f, |i, v| w(v) * f.values[i]) };
    (total, total > 0.0 && outer > 0.1 * total)
}

pub fn moments(f: &GridDensity, ks: &[f64], exp_params: Option<(f64, f64)>) -> Result<MomentReport, DensityError> {
    if let Some(&k) = ks.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
        return Err(DensityError::InvalidParameter(format!("moment order must be nonnegative, got {k}")));
    }
    let m_2k = ks
        .iter()
        .map(|&k| {
            let order = 2.0 * k;
            let (value, truncation_warning) = moment_with_warning(f, |v| weight_pow(v, order), is_even_integer(order));
            MomentValue { order, value, divergent: false, truncation_warning }
        })
        .collect();
    let m_exp = match exp_params {
        Some((a, mu)) => {
            if !(a > 0.0 && mu > 0.0) {
                return Err(DensityError::InvalidParameter(format!("exponential moment needs a, mu > 0, got ({a}, {mu})")));
            }
            let (value, truncation_warning) = moment_with_warning(f, |v| (a * v.abs().powf(mu)).exp(), is_even_integer(mu));
            let divergent = f.tail.map_or(false, |t| t.exp_moment_diverges(a, mu));
            Some(ExpMoment { a, mu, value, divergent, truncation_warning })
        }
        None => None,
    };
    Ok(MomentReport {
        mass: f.mass(),
        m2: absolute_moment(f, 2.0),
        m4: absolute_moment(f, 4.0),
        m_2k,
        m_exp,
        fisher: fisher_information(f),
        l_log_l: l_log_l_norm(f),
    })
}

/// Fisher information `∫ f'²/f`, computed as `4 ∫ (√f)'²` with fourth-order
/// central differences (second order next to the ends, one-sided at the
/// ends). The square-root form needs no division by the floor.
pub fn fisher_information(f: &GridDensity) -> f64 {
    let r = &f.roots;
    let n = r.len();
    let h = f.grid.spacing();
    let deriv = |i: usize| -> f64 {
        if i >= 2 && i + 2 < n {
            (r[i - 2] - 8.0 * r[i - 1] + 8.0 * r[i + 1] - r[i + 2]) / (12.0 * h)
        } else if i >= 1 && i + 1 < n {
            (r[i + 1] - r[i - 1]) / (2.0 * h)
        } else if i == 0 {
            (r[1] - r[0]) / h
        } else {
            (r[n - 1] - r[n - 2]) / h
        }
    };
    4.0 * f.grid.integrate_with(|i, _| {
        let d = deriv(i);
        d * d
    })
}

/// `‖f‖_{L log L} = ∫ f (1 + v²)(1 + |ln f|)`.
pub fn l_log_l_norm(f: &GridDensity) -> f64 {
    f.grid.integrate_with(|i, v| {
        let x = f.values[i];
        if x <= 0.0 {
            0.0
        } else {
            x * (1.0 + v * v) * (1.0 + x.ln().abs())
        }
    })
}

/// Rescales `f` to unit second moment: `v ↦ s f(s v)` with `s² = m2(f)`,
/// resampled on the same grid. The rescaling is repeated until the discrete
/// second moment is 1 to roundoff.
pub fn normalize_unit_energy(f: &GridDensity) -> Result<GridDensity, DensityError> {
    let mut cur = f.clone();
    for _ in 0..4 {
        let m2 = cur.second_moment();
        if !(m2.is_finite() && m2 > 0.0) {
            return Err(DensityError::DegenerateEnergy);
        }
        if (m2 - 1.0).abs() < 1e-14 {
            break;
        }
        let s = m2.sqrt();
        let src = cur.clone();
        cur = GridDensity::from_fn(f.grid, |v| s * src.eval(s * v))?;
    }
    cur.tail = None;
    Ok(cur)
}
