//! Analytic densities used throughout the test-suite and the runner.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::density::{maxwellian, GridDensity, TailModel};
use crate::error::DensityError;
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Builtin {
    /// `M_T`.
    Maxwellian { temperature: f64 },
    /// `½ N(−mu, sigma²) + ½ N(mu, sigma²)`.
    Bimodal { mu: f64, sigma: f64 },
    /// Uniform on `[−√3, √3]`.
    UniformEnergy,
}

impl Builtin {
    pub const BIMODAL_DEFAULT: Builtin = Builtin::Bimodal { mu: 1.2, sigma: 0.3 };

    pub fn validate(&self) -> Result<(), DensityError> {
        match *self {
            Builtin::Maxwellian { temperature } if !(temperature > 0.0 && temperature.is_finite()) => {
                Err(DensityError::InvalidParameter(format!("temperature must be positive, got {temperature}")))
            }
            Builtin::Bimodal { mu, sigma } if !(sigma > 0.0 && mu.is_finite() && sigma.is_finite()) => {
                Err(DensityError::InvalidParameter(format!("bimodal needs sigma > 0, got ({mu}, {sigma})")))
            }
            _ => Ok(()),
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            Builtin::Maxwellian { temperature } => temperature,
            Builtin::Bimodal { mu, sigma } => mu * mu + sigma * sigma,
            Builtin::UniformEnergy => 1.0,
        }
    }

    /// The same family member rescaled analytically to unit energy.
    pub fn unit_energy(&self) -> Builtin {
        match *self {
            Builtin::Maxwellian { .. } => Builtin::Maxwellian { temperature: 1.0 },
            Builtin::Bimodal { mu, sigma } => {
                let s = (mu * mu + sigma * sigma).sqrt();
                Builtin::Bimodal { mu: mu / s, sigma: sigma / s }
            }
            Builtin::UniformEnergy => Builtin::UniformEnergy,
        }
    }

    pub fn density(&self, v: f64) -> f64 {
        match *self {
            Builtin::Maxwellian { temperature } => {
                (-v * v / (2.0 * temperature)).exp() / (2.0 * PI * temperature).sqrt()
            }
            Builtin::Bimodal { mu, sigma } => {
                let c = 1.0 / (2.0 * sigma * (2.0 * PI).sqrt());
                let q = 2.0 * sigma * sigma;
                c * ((-(v - mu) * (v - mu) / q).exp() + (-(v + mu) * (v + mu) / q).exp())
            }
            Builtin::UniformEnergy => {
                if v.abs() < 3f64.sqrt() {
                    0.5 / 3f64.sqrt()
                } else {
                    0.0
                }
            }
        }
    }

    /// Declared tail bounds; `None` when no Gaussian lower bound exists.
    pub fn tail(&self) -> Option<TailModel> {
        match *self {
            Builtin::Maxwellian { temperature } => {
                let c = 1.0 / (2.0 * PI * temperature).sqrt();
                Some(TailModel { c1: c, a1: 0.5 / temperature, c2: c, a2: 0.0, mu: Some(2.0), a: Some(0.5 / temperature) })
            }
            Builtin::Bimodal { mu, sigma } => {
                // ½(e^{-(v-μ)²/2σ²} + e^{-(v+μ)²/2σ²}) = e^{-(v²+μ²)/2σ²} cosh(μv/σ²)
                let a1 = 0.5 / (sigma * sigma);
                let c = 1.0 / (sigma * (2.0 * PI).sqrt());
                Some(TailModel { c1: c * (-a1 * mu * mu).exp(), a1, c2: c, a2: 0.0, mu: Some(2.0), a: Some(a1) })
            }
            Builtin::UniformEnergy => None,
        }
    }

    /// Samples the density on `grid` and attaches the declared tail.
    pub fn sample(&self, grid: &Grid) -> Result<GridDensity, DensityError> {
        self.validate()?;
        let f = match *self {
            Builtin::Maxwellian { temperature } => return maxwellian(temperature, grid),
            _ => GridDensity::from_fn(*grid, |v| self.density(v))?,
        };
        Ok(match self.tail() {
            Some(t) => f.with_tail(t),
            None => f,
        })
    }

    /// Samples the unit-energy member of the family on `grid`.
    pub fn sample_unit_energy(&self, grid: &Grid) -> Result<GridDensity, DensityError> {
        self.unit_energy().sample(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::absolute_moment;

    #[test]
    fn unit_energy_members() {
        let g = Grid::default();
        let b = Builtin::BIMODAL_DEFAULT.sample_unit_energy(&g).unwrap();
        assert!((b.mass() - 1.0).abs() < 1e-12);
        assert!((absolute_moment(&b, 2.0) - 1.0).abs() < 1e-12);
        b.validate_tail().unwrap();
        let u = Builtin::UniformEnergy.sample(&g).unwrap();
        assert!((b.mass() - 1.0).abs() < 1e-12);
        assert!((absolute_moment(&u, 2.0) - 1.0).abs() < 2e-2);
    }
}
