mod common;

use std::f64::consts::PI;

use common::bimodal;
use density_core::special::ln_chi2_density;
use density_core::{maxwellian, Builtin, Grid};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use sphere_states::constants::{c_k_beta, cos_power_integral};
use sphere_states::fft::FftPower;
use sphere_states::io::{read_log_z_csv, read_profile_json, write_log_z_csv, write_profile_json};
use sphere_states::table::{TableOptions, TableSet};
use sphere_states::{
    g_concentration_profile, log_power_constant, log_scalability_constant, ConditionedTensor, EnergyLawDensity,
    LogPowerForm, ProfileOptions, SphereError, TensorOptions,
};

#[test]
fn energy_law_of_the_maxwellian_is_chi_square() {
    let m = maxwellian(1.0, &Grid::default()).unwrap();
    let h = EnergyLawDensity::new(&m).unwrap();
    let want = (-0.5f64).exp() / (2.0 * PI).sqrt();
    assert!((h.eval(1.0) - want).abs() < 1e-9);
    assert!((h.mass() - 1.0).abs() < 1e-8);
    assert!((h.mean() - 1.0).abs() < 1e-8);
    let b = EnergyLawDensity::new(&bimodal()).unwrap();
    assert!((b.mass() - 1.0).abs() < 1e-8 && (b.mean() - 1.0).abs() < 1e-8);
}

#[test]
fn k_beta_constant_by_quadrature() {
    let n = 20000;
    let q: f64 = (0..n).map(|l| (2.0 * PI * l as f64 / n as f64).cos().abs().powi(4)).sum::<f64>() * 2.0 * PI / n as f64;
    assert!((cos_power_integral(4.0) - q).abs() < 1e-9);
    assert!((c_k_beta(2.0, 1.0) - 32.0 * 0.75 * PI).abs() < 1e-9);
}

#[test]
fn scalability_constant_of_the_maxwellian() {
    let m = maxwellian(1.0, &Grid::default()).unwrap();
    let tail = Builtin::Maxwellian { temperature: 1.0 }.tail().unwrap();
    let tail = density_core::TailModel { a2: 0.0, ..tail };
    let logs: Vec<(usize, f64)> =
        [10usize, 50].iter().map(|&n| (n, ConditionedTensor::new(&m, n).unwrap().log_z())).collect();
    let c = log_scalability_constant(&m, &tail, &logs).unwrap();
    let half = 0.5 * (2.0 * PI).ln() + 0.5;
    assert!((c.tail_part - half).abs() < 1e-12);
    assert!((c.z_part - half).abs() < 1e-6);
    assert!((c.value - (1.0 + (2.0 * PI).ln())).abs() < 1e-6);
}

#[test]
fn scalability_constant_bounds_the_log_density_on_the_sphere() {
    let f = bimodal();
    let tail = *f.tail_model().unwrap();
    let n = 50;
    let ct = ConditionedTensor::new(&f, n).unwrap();
    let c = log_scalability_constant(&f, &tail, &[(n, ct.log_z())]).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let nf = n as f64;
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let k = (nf / x.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let ln_f: f64 = x.iter().map(|v| f.ln_eval(v * k)).sum::<f64>() - ct.log_z();
        worst = worst.max(ln_f.abs());
    }
    assert!(worst <= c.value * nf, "{worst} > {}", c.value * nf);
}

#[test]
fn scalability_constant_rejects_missing_or_violated_bounds() {
    let u = Builtin::UniformEnergy.sample(&Grid::default()).unwrap();
    let tail = density_core::TailModel { c1: 0.1, a1: 0.5, c2: 1.0, a2: 0.0, mu: None, a: None };
    assert!(matches!(log_scalability_constant(&u, &tail, &[]), Err(SphereError::Density(_))));
    let f = bimodal();
    let bad = density_core::TailModel { c1: 1.0, ..*f.tail_model().unwrap() };
    assert!(log_scalability_constant(&f, &bad, &[]).is_err());
}

#[test]
fn maxwellian_profile_matches_the_chi_square_closed_form() {
    let m = maxwellian(1.0, &Grid::default()).unwrap();
    let p = g_concentration_profile(&m, &[20, 80], ProfileOptions::default()).unwrap();
    assert!((p.sigma2 - 2.0).abs() < 1e-8);
    for e in &p.entries {
        let nf = e.n as f64;
        let want = (2.0 * nf).sqrt() * ln_chi2_density(nf, nf).exp();
        assert!((e.measured_at_zero - want).abs() < 1e-6, "N = {}", e.n);
        assert!((e.measured_at_zero - (2.0 * PI).sqrt().recip()).abs() < 0.1 / nf);
        assert!(!e.shrunk);
    }
}

#[test]
fn bimodal_profile_residual_decreases() {
    let f = bimodal();
    let p = g_concentration_profile(&f, &[20, 80, 320], ProfileOptions::default()).unwrap();
    assert!(p.residual_decreasing, "{:?}", p.entries.iter().map(|e| e.sup_residual).collect::<Vec<_>>());
    assert!(p.entries.iter().all(|e| e.sup_residual >= 0.0));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.json");
    write_profile_json(&p, &path).unwrap();
    assert_eq!(read_profile_json(&path).unwrap(), p);
}

#[test]
fn compact_support_shrinks_the_window() {
    let u = Builtin::UniformEnergy.sample(&Grid::default()).unwrap();
    let p = g_concentration_profile(&u, &[5], ProfileOptions { window_sigmas: 20.0, ..Default::default() }).unwrap();
    assert!(p.entries[0].shrunk && !p.warnings.is_empty());
}

#[test]
fn log_power_integral_is_below_its_constant() {
    let f = bimodal();
    let prof = g_concentration_profile(&f, &[20, 80, 320], ProfileOptions::default()).unwrap();
    let tail = *f.tail_model().unwrap();
    let c = log_power_constant(&f, 1.0, LogPowerForm::Tail { c1: tail.c1, a1: tail.a1 }, 0.5, &prof).unwrap();
    assert!(c.lower_bound_holds);
    let fisher = log_power_constant(&f, 1.0, LogPowerForm::Fisher { k: 2.0 }, 0.5, &prof).unwrap();
    assert!(fisher.value.is_finite() && fisher.value > 0.0);
    assert!(!fisher.lower_bound_holds);
    let lp = ConditionedTensor::new(&f, 100).unwrap().log_power_integral(1.0).unwrap().value;
    assert!(lp <= c.value.powi(2), "{lp} > {}", c.value.powi(2));
    assert!(lp <= fisher.value.powi(2));
}

#[test]
fn table_csv_round_trip() {
    let f = bimodal();
    let ct = ConditionedTensor::new(&f, 40).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("logz.csv");
    write_log_z_csv(ct.tables(), &path).unwrap();
    let set = read_log_z_csv(&f, &path, TableOptions::default()).unwrap();
    let back = ConditionedTensor::from_tables(set, 40, TensorOptions::default()).unwrap();
    // logZ is stored, ln A recovered from it: a few ulps move
    assert!((back.log_z() - ct.log_z()).abs() < 1e-12 * ct.log_z().abs());
    let (a, b) = (back.entropy_hn().unwrap().value, ct.entropy_hn().unwrap().value);
    assert!((a - b).abs() < 1e-10 * b);
    // a set without the level N − 2 cannot serve a tensor
    let partial = TableSet::build(&f, &[(40, 40.0, 40.0)], TableOptions::default()).unwrap();
    assert!(ConditionedTensor::from_tables(partial, 40, TensorOptions::default()).is_err());
}

#[test]
fn fft_powers_cross_check_the_tables() {
    let f = bimodal();
    let sigma = (density_core::moments(&f, &[], None).unwrap().m4 - 1.0).sqrt();
    for m in [5usize, 8, 16, 64] {
        let mf = m as f64;
        let sd = sigma * mf.sqrt();
        let pts: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|k| mf + k * sd).collect();
        let set = TableSet::build(&f, &[(m, pts[0], pts[4])], TableOptions::default()).unwrap();
        let fft = FftPower::new(&f, m, 0.002).unwrap();
        for &u in &pts {
            let table = (ln_chi2_density(mf, u) + set.ln_a(m, u).unwrap()).exp();
            let lattice = fft.density(u);
            assert!(((lattice - table) / table).abs() < 2e-5, "m = {m}, u = {u}: {lattice} vs {table}");
        }
    }
}
