//! Log-domain special functions.

use std::f64::consts::PI;

pub use statrs::function::gamma::ln_gamma;

/// ln |S^{m-1}|, the surface area of the unit sphere in R^m.
pub fn ln_sphere_area(m: f64) -> f64 {
    std::f64::consts::LN_2 + 0.5 * m * PI.ln() - ln_gamma(0.5 * m)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// ln of the chi-square density with `m` degrees of freedom at `u > 0`.
pub fn ln_chi2_density(m: f64, u: f64) -> f64 {
    (0.5 * m - 1.0) * u.ln() - 0.5 * u - 0.5 * m * std::f64::consts::LN_2 - ln_gamma(0.5 * m)
}

/// Streaming log-sum-exp in a fixed summation order.
#[derive(Clone, Copy, Debug)]
pub struct LogSum {
    max: f64,
    sum: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        LogSum { max: f64::NEG_INFINITY, sum: 0.0 }
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.sum += (x - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut acc = LogSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// ln((e^a + e^b) / 2).
#[inline]
pub fn ln_mean_exp2(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + (0.5 * ((a - m).exp() + (b - m).exp())).ln()
}
