//! Adaptive evaluation of `ln A_m(u)` for `m ≤ 4`.
//!
//! The interpolated density is a different polynomial on every grid cell, so
//! each angular integral is split wherever a coordinate crosses a grid node
//! (for the outer angle: wherever the inner circle's radius does). Gauss–
//! Kronrod panels then see smooth integrands, including the discontinuous
//! edge of compactly supported data.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use density_core::quad::adaptive_segments;

use crate::phi::Phi;

const TOL: f64 = 1e-10;
const DEPTH: u32 = 12;
const OUTER_TOL: f64 = 1e-9;

/// Nonnegative grid nodes strictly inside `(0, r)`.
fn nodes_below(phi: &Phi, r: f64) -> impl Iterator<Item = f64> + '_ {
    let grid = *phi.density().grid();
    (grid.nonnegative_start()..grid.n_points).map(move |i| grid.node(i)).filter(move |&v| v > 0.0 && v < r)
}

fn finish(mut breaks: Vec<f64>) -> Vec<f64> {
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    breaks
}

/// `ln A_2(w)`: the circle of radius `√w` split at every node crossing.
pub fn ln_a2(phi: &Phi, w: f64) -> f64 {
    let r = w.max(0.0).sqrt();
    if r == 0.0 {
        return 2.0 * phi.phi(0.0);
    }
    let mut breaks = vec![0.0, FRAC_PI_2, PI, 1.5 * PI, 2.0 * PI];
    for v in nodes_below(phi, r) {
        let a = (v / r).acos();
        breaks.extend([a, PI - a, PI + a, 2.0 * PI - a, FRAC_PI_2 - a, FRAC_PI_2 + a, 1.5 * PI - a, 1.5 * PI + a]);
    }
    let breaks = finish(breaks);
    let lam = |a: f64| phi.phi(r * a.cos()) + phi.phi(r * a.sin());
    let shift = breaks
        .windows(2)
        .map(|s| lam(0.5 * (s[0] + s[1])))
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return shift;
    }
    let (val, _) = adaptive_segments(|a| (lam(a) - shift).exp(), &breaks, TOL, DEPTH);
    shift + (val / (2.0 * PI)).ln()
}

/// `ln A_m(u)` for `m ∈ {1, 2, 3, 4}`.
///
/// `A_3(u) = ∫₀^{π/2} cos τ A_1(u sin²τ) A_2(u cos²τ) dτ` and
/// `A_4(u) = ∫₀^{π/2} 2 sin τ cos τ A_2(u sin²τ) A_2(u cos²τ) dτ`.
pub fn ln_a(phi: &Phi, m: usize, u: f64) -> f64 {
    match m {
        0 => 0.0,
        1 => phi.ln_a1(u),
        2 => ln_a2(phi, u),
        3 | 4 => {
            let ru = u.max(0.0).sqrt();
            // the m = 4 integrand is symmetric about π/4
            let top = if m == 4 { FRAC_PI_4 } else { FRAC_PI_2 };
            let mut breaks = vec![0.0, top];
            for v in nodes_below(phi, ru) {
                let s = (v / ru).asin();
                breaks.extend([s, FRAC_PI_2 - s].into_iter().filter(|&b| b < top));
            }
            let breaks = finish(breaks);
            let lg = |t: f64| -> f64 {
                let (s, c) = t.sin_cos();
                if m == 3 {
                    c.ln() + phi.ln_a1(u * s * s) + ln_a2(phi, u * c * c)
                } else {
                    (2.0 * s * c).ln() + ln_a2(phi, u * s * s) + ln_a2(phi, u * c * c)
                }
            };
            let shift = breaks
                .windows(2)
                .map(|s| lg(0.5 * (s[0] + s[1])))
                .fold(f64::NEG_INFINITY, f64::max);
            if shift == f64::NEG_INFINITY {
                return shift;
            }
            let (val, _) = adaptive_segments(|t| (lg(t) - shift).exp(), &breaks, OUTER_TOL, 8);
            let val = if m == 4 { 2.0 * val } else { val };
            shift + val.ln()
        }
        _ => panic!("direct evaluation covers m <= 4, got {m}"),
    }
}
