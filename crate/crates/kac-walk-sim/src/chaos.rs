//! Pooled empirical marginals against a reference one-particle density.

use density_core::quad::GaussLegendre;
use density_core::GridDensity;
use serde::{Deserialize, Serialize};

use crate::error::WalkError;
use crate::walk::{Histogram, TrajectoryRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChaosDistance {
    pub t: f64,
    /// L¹ distance between pooled bin masses and the reference bin masses
    /// (overflow bins included).
    pub l1: f64,
    /// Expected L¹ from Monte Carlo noise alone: `√(2/π) Σ_b se_b`, with
    /// `se_b` the standard error of bin `b` across ensemble members.
    pub noise: f64,
    pub samples: u64,
}

/// Reference masses of `f` on the histogram's bins plus overflows.
pub fn bin_masses(f: &GridDensity, hist: &Histogram) -> Vec<f64> {
    let gl = GaussLegendre::new(8);
    let per_bin = 8;
    let mut m: Vec<f64> = (0..hist.counts.len())
        .map(|k| {
            let (a, b) = hist.edges(k);
            gl.composite(a, b, per_bin, |v| f.eval(v))
        })
        .collect();
    let inner: f64 = m.iter().sum();
    let below = gl.composite(f.v_min(), hist.lo.max(f.v_min()), 64, |v| f.eval(v)).max(0.0);
    let above = (1.0 - inner - below).max(0.0);
    m.push(below);
    m.push(above);
    m
}

/// Per-sample-time distances between the ensemble's pooled histograms and
/// `reference`, a list of `(t, f(·, t))` with the same times as the records.
pub fn propagation_of_chaos_check(records: &[TrajectoryRecord], reference: &[(f64, GridDensity)]) -> Result<Vec<ChaosDistance>, WalkError> {
    let first = records.first().ok_or(WalkError::ScheduleMismatch)?;
    let times: Vec<f64> = first.samples.iter().map(|s| s.t).collect();
    for r in records {
        if r.samples.len() != times.len()
            || r.samples.iter().zip(&times).any(|(s, t)| s.t != *t || !s.histogram.same_bins(&first.samples[0].histogram))
        {
            return Err(WalkError::ScheduleMismatch);
        }
    }
    let mut out = Vec::with_capacity(reference.len());
    for (t, f) in reference {
        let k = times.iter().position(|s| (s - t).abs() <= 1e-12 * t.abs().max(1.0)).ok_or(WalkError::ScheduleMismatch)?;
        let members: Vec<Vec<f64>> = records.iter().map(|r| r.samples[k].histogram.masses()).collect();
        let m = members.len() as f64;
        let bins = members[0].len();
        let pooled: Vec<f64> = (0..bins).map(|b| members.iter().map(|p| p[b]).sum::<f64>() / m).collect();
        let reference = bin_masses(f, &first.samples[k].histogram);
        let l1 = pooled.iter().zip(&reference).map(|(a, b)| (a - b).abs()).sum();
        let noise = if members.len() > 1 {
            (0..bins)
                .map(|b| {
                    let var = members.iter().map(|p| (p[b] - pooled[b]).powi(2)).sum::<f64>() / (m - 1.0);
                    (var / m).sqrt()
                })
                .sum::<f64>()
                * (2.0 / std::f64::consts::PI).sqrt()
        } else {
            f64::NAN
        };
        let samples = records.iter().map(|r| r.samples[k].histogram.total()).sum();
        out.push(ChaosDistance { t: *t, l1, noise, samples });
    }
    Ok(out)
}
