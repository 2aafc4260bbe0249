use density_core::{l1_distance, maxwellian, moments, Builtin, Grid, GridDensity};
use kac_boltzmann_solver::io::{read_series, write_trajectory};
use kac_boltzmann_solver::{
    entropy_production_dgamma, moment_history, solve, solve_with_cache, CollisionKernelCache, SolverConfig, SolverError,
    Trajectory,
};
use proptest::prelude::*;

fn bimodal(grid: &Grid) -> GridDensity {
    Builtin::BIMODAL_DEFAULT.sample_unit_energy(grid).unwrap()
}

fn bimodal_run(gamma: f64, dt: Option<f64>, dissipation: bool) -> Trajectory {
    let grid = Grid::default();
    let cfg = SolverConfig { gamma, dt, dissipation, sample_times: vec![0.5, 1.0, 2.0, 3.5], ..Default::default() };
    solve(&bimodal(&grid), &cfg).unwrap()
}

#[test]
fn maxwellian_stays_fixed() {
    let grid = Grid::default();
    let m = maxwellian(1.0, &grid).unwrap();
    let cfg = SolverConfig { dissipation: false, ..Default::default() };
    let tr = solve(&m, &cfg).unwrap();
    for k in 0..tr.densities.len() {
        let g = tr.density(k).unwrap();
        assert!(l1_distance(&g, &m).unwrap() <= 1e-8);
    }
}

#[test]
fn bimodal_relaxation_keeps_invariants_and_the_h_theorem() {
    let tr = bimodal_run(0.0, None, true);
    let h0 = tr.records[0].h;
    for w in tr.h_steps.windows(2) {
        assert!(w[1].1 < w[0].1, "H rose at t = {}", w[1].0);
    }
    assert!(tr.records.last().unwrap().h <= 0.1 * h0);
    for r in &tr.records {
        assert!((r.mass - 1.0).abs() <= 1e-10 && (r.energy - 1.0).abs() <= 1e-10, "{r:?}");
    }
    // Pinsker at every sample
    let grid = tr.grid;
    let m = maxwellian(1.0, &grid).unwrap();
    for (k, r) in tr.records.iter().enumerate() {
        let d = l1_distance(&tr.density(k).unwrap(), &m).unwrap();
        assert!(d <= (2.0 * r.h).sqrt(), "t = {}: {d} vs {}", r.t, (2.0 * r.h).sqrt());
    }
    assert_eq!(tr.clamped, 0);
}

#[test]
fn dissipation_matches_the_entropy_slope() {
    let tr = bimodal_run(0.0, None, true);
    for r in &tr.records[1..4] {
        // centred differences over ±δ and ±2δ, Richardson-combined
        let i = tr.h_steps.iter().position(|p| (p.0 - r.t).abs() < 1e-9).unwrap();
        let fd = |k: usize| (tr.h_steps[i - k].1 - tr.h_steps[i + k].1) / (tr.h_steps[i + k].0 - tr.h_steps[i - k].0);
        let slope = (4.0 * fd(1) - fd(2)) / 3.0;
        let d = r.d.unwrap();
        assert!((d - slope).abs() <= 0.01 * d, "t = {}: D {d} vs -dH/dt {slope}", r.t);
        // the raw one-step difference is already within the same band
        assert!((d - fd(1)).abs() <= 0.01 * d);
    }
}

#[test]
fn halving_the_step_changes_little() {
    let a = bimodal_run(0.0, None, false);
    let b = bimodal_run(0.0, Some(a.dt / 2.0), false);
    let d = l1_distance(&a.last().unwrap(), &b.last().unwrap()).unwrap();
    assert!(d <= 1e-6, "{d:e}");
}

#[test]
fn hard_kernel_run_is_stable_with_default_step() {
    let tr = bimodal_run(1.0, None, false);
    assert!(tr.records.last().unwrap().h < 1e-3 * tr.records[0].h);
    let hist = moment_history(&tr).unwrap();
    let m = maxwellian(1.0, &tr.grid).unwrap();
    let eq = moments(&m, &[1.0, 2.0, 3.0, 4.0], None).unwrap();
    // moments stay below the larger of their initial and equilibrium values
    for (j, mv) in eq.m_2k.iter().enumerate() {
        let cap = hist[0][j].max(mv.value) * (1.0 + 1e-6);
        for row in &hist {
            assert!(row[j] <= cap, "M_{}: {} > {cap}", 2 * (j + 1), row[j]);
        }
    }
}

#[test]
fn oversized_steps_are_reported() {
    let grid = Grid::default();
    let cfg = SolverConfig { gamma: 1.0, dt: Some(0.05), t_end: 1.0, dissipation: false, ..Default::default() };
    match solve(&bimodal(&grid), &cfg) {
        Err(SolverError::EntropyIncrease { step, increase, .. }) => assert!(step >= 1 && increase > 0.0),
        other => panic!("expected an entropy increase, got {:?}", other.map(|t| t.records.len())),
    }
}

#[test]
fn dissipation_closed_form_properties() {
    let grid = Grid::default();
    for t in [1.0, 0.7] {
        let m = maxwellian(t, &grid).unwrap();
        for gamma in [0.0, 1.0] {
            assert!(entropy_production_dgamma(&m, gamma, 64).unwrap().value.abs() <= 1e-8);
        }
    }
    let f = bimodal(&grid);
    let d: Vec<f64> = [0.0, 0.5, 1.0].iter().map(|&g| entropy_production_dgamma(&f, g, 64).unwrap().value).collect();
    assert!(d[0] > 0.0 && d[0] <= d[1] && d[1] <= d[2], "{d:?}");
    let u = Builtin::UniformEnergy.sample(&grid).unwrap();
    assert!(entropy_production_dgamma(&u, 0.0, 64).unwrap().unreliable);
    assert!(!entropy_production_dgamma(&f, 0.0, 64).unwrap().unreliable);
    assert!(entropy_production_dgamma(&f, 1.5, 64).is_err());
}

#[test]
fn input_validation() {
    let grid = Grid::default();
    let raw = Builtin::BIMODAL_DEFAULT.sample(&grid).unwrap();
    let cfg = SolverConfig { t_end: 0.1, ..Default::default() };
    assert!(matches!(solve(&raw, &cfg), Err(SolverError::NotNormalized { .. })));
    for bad in [
        SolverConfig { dt: Some(0.0), ..Default::default() },
        SolverConfig { theta_nodes: 32, ..Default::default() },
        SolverConfig { gamma: -0.1, ..Default::default() },
        SolverConfig { sample_times: vec![9.0], ..Default::default() },
    ] {
        assert!(matches!(solve(&bimodal(&grid), &bad), Err(SolverError::InvalidConfig(_))));
    }
    let cache = CollisionKernelCache::new(&grid, 0.5, 64, 4.0).unwrap();
    assert!(matches!(solve_with_cache(&bimodal(&grid), &cfg, &cache), Err(SolverError::CacheMismatch)));
}

#[test]
fn trajectory_export_round_trip() {
    let grid = Grid::default();
    let cfg = SolverConfig { t_end: 0.2, sample_times: vec![0.1], ..Default::default() };
    let tr = solve(&bimodal(&grid), &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = write_trajectory(&tr, dir.path()).unwrap();
    assert_eq!(paths.len(), 3);
    let s = read_series(dir.path().join("series.json")).unwrap();
    assert_eq!(s.series, tr.records);
    let mut rd = csv::Reader::from_path(&paths[2]).unwrap();
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), grid.n_points);
    let y: f64 = rows[700][1].parse().unwrap();
    assert_eq!(y, tr.densities[2][700]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]
    #[test]
    fn short_runs_conserve_and_dissipate(mu in 0.4f64..1.5, sigma in 0.3f64..0.9, gamma in 0.0f64..1.0) {
        let grid = Grid::default();
        let f = Builtin::Bimodal { mu, sigma }.sample_unit_energy(&grid).unwrap();
        let cfg = SolverConfig { gamma, t_end: 0.2, dissipation: false, ..Default::default() };
        let tr = solve(&f, &cfg).unwrap();
        let last = tr.records.last().unwrap();
        prop_assert!((last.mass - 1.0).abs() <= 1e-10 && (last.energy - 1.0).abs() <= 1e-10);
        prop_assert!(last.h <= tr.records[0].h);
    }
}
