#![allow(dead_code)]

use std::f64::consts::PI;

use density_core::quad::GaussLegendre;
use density_core::{Builtin, Grid, GridDensity};

pub fn bimodal() -> GridDensity {
    Builtin::BIMODAL_DEFAULT.sample_unit_energy(&Grid::default()).unwrap()
}

/// Uniform average of `g(x, y, z)` over `S²(√u)` by Gauss–Legendre in both
/// spherical angles.
pub fn sphere3_mean<G: FnMut(f64, f64, f64) -> f64>(u: f64, mut g: G) -> f64 {
    let r = u.sqrt();
    let gl = GaussLegendre::new(16);
    let th = gl.composite_nodes(0.0, PI, 48);
    let ph = gl.composite_nodes(0.0, 2.0 * PI, 96);
    let mut acc = 0.0;
    for &(t, wt) in &th {
        let (st, ct) = t.sin_cos();
        let mut inner = 0.0;
        for &(p, wp) in &ph {
            let (sp, cp) = p.sin_cos();
            inner += wp * g(r * ct, r * st * cp, r * st * sp);
        }
        acc += wt * st * inner;
    }
    acc / (4.0 * PI)
}

pub fn z3(f: &GridDensity) -> f64 {
    sphere3_mean(3.0, |x, y, z| f.eval(x) * f.eval(y) * f.eval(z))
}
