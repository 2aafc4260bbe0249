use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use density_core::special::ln_beta;
use density_core::{maxwellian, Builtin, Grid, GridDensity};
use kac_walk_sim::*;
use sphere_states::ConditionedTensor;

fn bimodal() -> GridDensity {
    Builtin::BIMODAL_DEFAULT.sample_unit_energy(&Grid::default()).unwrap()
}

/// Single-coordinate marginal of the uniform law on `S^{N−1}(√N)`.
fn sphere_marginal(n: usize) -> GridDensity {
    let nf = n as f64;
    let c = -0.5 * nf.ln() - ln_beta(0.5, 0.5 * (nf - 1.0));
    GridDensity::from_fn(Grid::default(), |v| {
        let s = 1.0 - v * v / nf;
        if s <= 0.0 {
            0.0
        } else {
            (c + 0.5 * (nf - 3.0) * s.ln()).exp()
        }
    })
    .unwrap()
}

fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn rotation_examples() {
    let mut s = ParticleState { velocities: vec![1.0, 0.0, 2.0], energy_cache: 5.0 };
    collision_rotate(&mut s, 0, 1, 0.0).unwrap();
    assert_eq!(s.velocities, vec![1.0, 0.0, 2.0]);
    let mut q = ParticleState { velocities: vec![0.3, -1.1, 2.0], energy_cache: 0.0 };
    collision_rotate(&mut q, 0, 1, FRAC_PI_2).unwrap();
    assert!((q.velocities[0] + 1.1).abs() < 1e-15 && (q.velocities[1] + 0.3).abs() < 1e-15);
    collision_rotate(&mut s, 0, 1, FRAC_PI_4).unwrap();
    assert!((s.velocities[0] - FRAC_1_SQRT_2).abs() < 1e-15 && (s.velocities[1] + FRAC_1_SQRT_2).abs() < 1e-15);
    assert_eq!(s.velocities[2], 2.0);
    assert!(matches!(collision_rotate(&mut s, 1, 1, 0.3), Err(WalkError::SameParticle(1))));
    assert!(collision_rotate(&mut s, 0, 3, 0.3).is_err());
}

#[test]
fn inverse_cdf_is_exact_for_the_flat_density() {
    let u = Builtin::UniformEnergy.sample(&Grid::new(2.0, 2049).unwrap()).unwrap();
    let inv = InverseCdf::new(&u);
    let a = 3f64.sqrt();
    // away from the two edge cells the interpolant is flat
    for p in [0.1, 0.25, 0.5, 0.8, 0.95] {
        assert!((inv.quantile(p) - (-a + 2.0 * a * p)).abs() < 2e-3, "{p}: {}", inv.quantile(p));
    }
    let inv_m = InverseCdf::new(&maxwellian(1.0, &Grid::default()).unwrap());
    assert!(inv_m.quantile(0.5).abs() < 1e-12);
    // Φ(1) = 0.841344746...
    assert!((inv_m.quantile(0.841_344_746_068_543) - 1.0).abs() < 1e-4);
}

#[test]
fn chaotic_initial_data() {
    let f = bimodal();
    let inv = InverseCdf::new(&f);
    let mut rng = walk_rng(7, 0);
    let n = 10_000;
    let inside = (0..200)
        .filter(|_| {
            let e: f64 = (0..n).map(|_| inv.sample(&mut rng).powi(2)).sum::<f64>() / n as f64;
            (0.9..=1.1).contains(&e)
        })
        .count();
    assert!(inside as f64 >= 0.99 * 200.0);
    let s = sample_chaotic_initial(&f, n, &mut rng).unwrap();
    assert!((s.energy() - n as f64).abs() <= 1e-12 * n as f64);
    let mut h = Histogram::new(64, 5.0);
    s.velocities.iter().for_each(|&x| h.add(x));
    let l1: f64 = h.masses().iter().zip(bin_masses(&f, &h)).map(|(a, b)| (a - b).abs()).sum();
    assert!(l1 <= 0.05, "{l1}");
    let raw = Builtin::BIMODAL_DEFAULT.sample(&Grid::default()).unwrap();
    assert!(matches!(sample_chaotic_initial(&raw, 10, &mut rng), Err(WalkError::NotUnitEnergy(_))));
}

#[test]
fn maxwell_kernel_event_rate_is_n() {
    let f = bimodal();
    let mut rng = walk_rng(11, 0);
    let n = 50;
    let mut s = sample_chaotic_initial(&f, n, &mut rng).unwrap();
    let mut sampler = EventSampler::new(&s, 0.0);
    let k = 100_000;
    let total: f64 = (0..k).map(|_| sampler.step(&mut s, &mut rng).dt).sum();
    let mean = total / k as f64;
    let se = 1.0 / (n as f64 * (k as f64).sqrt());
    assert!((mean - 1.0 / n as f64).abs() <= 3.0 * se, "{mean} vs {}", 1.0 / n as f64);
}

#[test]
fn hard_kernel_pair_selection_matches_exact_rates() {
    let n = 20;
    let nf = n as f64;
    let mut v = vec![0.0; n];
    v[0] = nf.sqrt();
    let s0 = ParticleState::from_velocities(v).unwrap();
    let (big, small) = ((nf - 1.0) * (1.0 + nf), ((n - 1) * (n - 2) / 2) as f64);
    let p = big / (big + small);
    let rate = 2.0 / (nf - 1.0) * (big + small);
    for weighted in [false, true] {
        let mut rng = walk_rng(5, weighted as u64);
        let trials = 40_000;
        let mut hits = 0usize;
        let mut waits = Vec::with_capacity(trials);
        for _ in 0..trials {
            let mut s = s0.clone();
            let mut sampler = EventSampler::new(&s, 1.0);
            if weighted {
                sampler.force_weighted(&s);
            }
            let ev = sampler.step(&mut s, &mut rng);
            hits += (ev.i == 0 || ev.j == 0) as usize;
            waits.push(ev.dt);
        }
        let freq = hits as f64 / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((freq - p).abs() <= 3.0 * se, "weighted {weighted}: {freq} vs {p}");
        let (m, se_t) = mean_se(&waits);
        assert!((m - 1.0 / rate).abs() <= 3.0 * se_t, "weighted {weighted}: {m} vs {}", 1.0 / rate);
    }
}

#[test]
fn energy_is_conserved_over_a_million_events() {
    let mut rng = walk_rng(3, 0);
    let n = 100;
    let mut s = sample_chaotic_initial(&bimodal(), n, &mut rng).unwrap();
    let e0 = s.energy();
    let m0 = s.momentum();
    let mut sampler = EventSampler::new(&s, 0.0);
    for _ in 0..1_000_000 {
        sampler.step(&mut s, &mut rng);
    }
    assert!((s.energy() - e0).abs() <= 1e-8 * e0);
    assert!((s.energy_cache - s.energy()).abs() <= 1e-10 * n as f64);
    // energy but not momentum is a collision invariant
    assert!((s.momentum() - m0).abs() > 1e-3);
    s.renormalize();
    assert!((s.energy() - n as f64).abs() <= 1e-14 * n as f64 * 10.0);
}

#[test]
fn fourth_moment_follows_its_closed_equation() {
    // at γ = 0, d/dt E[m4] = −λ (E[m4] − 3N/(N+2)) with λ = (N+2)/(2(N−1))
    let n = 100;
    let nf = n as f64;
    let cfg = WalkConfig { n, t_end: 4.0, sample_times: vec![0.5, 1.0, 2.0], seed: 21, ..Default::default() };
    let ens = run_ensemble(&cfg, &bimodal(), 200).unwrap();
    let eq = 3.0 * nf / (nf + 2.0);
    let lambda = (nf + 2.0) / (2.0 * (nf - 1.0));
    let m4_0: Vec<f64> = ens.iter().map(|r| r.samples[0].m4).collect();
    let (start, _) = mean_se(&m4_0);
    let mut last = start;
    for k in 1..ens[0].samples.len() {
        let t = ens[0].samples[k].t;
        let x: Vec<f64> = ens.iter().map(|r| r.samples[k].m4).collect();
        let (m, se) = mean_se(&x);
        let pred = eq + (start - eq) * (-lambda * t).exp();
        assert!((m - pred).abs() <= 3.0 * se, "t = {t}: {m} ± {se} vs {pred}");
        assert!(m > last - 3.0 * se && m < eq + 3.0 * se);
        last = m;
        for r in &ens {
            assert!((r.samples[k].m2 - 1.0).abs() <= 1e-8);
        }
    }
}

#[test]
fn event_counts_have_mean_nt() {
    let n = 200;
    let cfg = WalkConfig { n, t_end: 2.0, seed: 4, bins: 8, ..Default::default() };
    let ens = run_ensemble(&cfg, &bimodal(), 60).unwrap();
    let counts: Vec<f64> = ens.iter().map(|r| r.events as f64).collect();
    let (m, se) = mean_se(&counts);
    assert!((m - 2.0 * n as f64).abs() <= 3.0 * se, "{m} ± {se}");
}

#[test]
fn same_seed_same_trajectory() {
    let f = bimodal();
    for gamma in [0.0, 0.7] {
        let cfg = WalkConfig { n: 64, gamma, t_end: 3.0, sample_times: vec![1.0], seed: 99, ..Default::default() };
        let a = run_walk(&cfg, &f).unwrap();
        let b = run_walk(&cfg, &f).unwrap();
        assert!(a.same_outcome(&b));
        let bits = |r: &TrajectoryRecord| r.final_state.velocities.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let c = run_stream(&cfg, &f, 1).unwrap();
        assert!(!a.same_outcome(&c));
    }
    let cfg = WalkConfig { n: 50, t_end: 1.0, seed: 1, ..Default::default() };
    let e1 = run_ensemble(&cfg, &f, 8).unwrap();
    let e2: Vec<_> = (0..8).map(|s| run_stream(&cfg, &f, s).unwrap()).collect();
    assert!(e1.iter().zip(&e2).all(|(a, b)| a.same_outcome(b)));
}

#[test]
fn uniform_sphere_law_is_stationary() {
    let n = 1000;
    let cfg = WalkConfig { n, t_end: 5.0, seed: 8, ..Default::default() };
    let m = maxwellian(1.0, &Grid::default()).unwrap();
    let ens = run_ensemble(&cfg, &m, 100).unwrap();
    let reference = sphere_marginal(n);
    let d = propagation_of_chaos_check(&ens, &[(0.0, reference.clone()), (5.0, reference)]).unwrap();
    for x in &d {
        assert!(x.l1 <= 0.05, "{x:?}");
    }
}

#[test]
fn relabelling_particles_does_not_change_statistics() {
    let f = bimodal();
    let n = 40;
    let cfg = WalkConfig { n, t_end: 1.0, ..Default::default() };
    let stat = |perm: bool| -> Vec<f64> {
        (0..300u64)
            .map(|k| {
                let mut rng = walk_rng(17, k);
                let mut s = sample_chaotic_initial(&f, n, &mut rng).unwrap();
                if perm {
                    s.velocities.reverse();
                }
                // a fresh stream for the dynamics so both runs see the same draws
                let mut dyn_rng = walk_rng(18, k);
                run_from_state(&cfg, s, k, &mut dyn_rng).unwrap().samples[1].m4
            })
            .collect()
    };
    let (a, sa) = mean_se(&stat(false));
    let (b, sb) = mean_se(&stat(true));
    assert!((a - b).abs() <= 3.0 * (sa * sa + sb * sb).sqrt(), "{a} vs {b}");
}

#[test]
fn metropolis_targets_the_conditioned_tensor() {
    let f = bimodal();
    let n = 10;
    let ct = ConditionedTensor::new(&f, n).unwrap();
    let exact = ct.marginal_moment(4.0).unwrap().value;
    // chains start from Maxwellian data, far from the target in m4
    let start = maxwellian(1.0, &Grid::default()).unwrap();
    let draws: Vec<f64> = (0..400u64)
        .map(|k| {
            let mut rng = walk_rng(31, k);
            let mut s = sample_chaotic_initial(&start, n, &mut rng).unwrap();
            let acc = metropolis_sweeps(&f, &mut s, 200, &mut rng);
            assert!(acc > 0.01);
            assert!((s.energy() - n as f64).abs() < 1e-9);
            s.moment(4)
        })
        .collect();
    let (m, se) = mean_se(&draws);
    assert!((m - exact).abs() <= 3.0 * se, "{m} ± {se} vs {exact}");
}

#[test]
fn chaos_check_at_time_zero_sees_only_sampling_noise() {
    let f = bimodal();
    let cfg = WalkConfig { n: 1000, t_end: 0.5, seed: 2, ..Default::default() };
    let ens = run_ensemble(&cfg, &f, 50).unwrap();
    let d = propagation_of_chaos_check(&ens, &[(0.0, f.clone())]).unwrap();
    assert!(d[0].l1 <= 2.0 * d[0].noise + 0.005, "{:?}", d[0]);
    assert_eq!(d[0].samples, 50_000);
    assert!(matches!(propagation_of_chaos_check(&ens, &[(0.25, f.clone())]), Err(WalkError::ScheduleMismatch)));
    let other = run_walk(&WalkConfig { bins: 32, ..cfg.clone() }, &f).unwrap();
    let mut mixed = ens.clone();
    mixed.push(other);
    assert!(matches!(propagation_of_chaos_check(&mixed, &[(0.0, f)]), Err(WalkError::ScheduleMismatch)));
}

#[test]
fn record_and_histogram_files() {
    let f = bimodal();
    let cfg = WalkConfig { n: 30, t_end: 1.0, sample_times: vec![0.5], ..Default::default() };
    let r = run_walk(&cfg, &f).unwrap();
    let dir = tempfile::tempdir().unwrap();
    io::write_record(&r, dir.path(), "walk").unwrap();
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("walk.json")).unwrap()).unwrap();
    assert_eq!(meta["events"].as_u64().unwrap(), r.events);
    let rows = csv::Reader::from_path(dir.path().join("walk.csv")).unwrap().records().count();
    assert_eq!(rows, 3);
    let hp = dir.path().join("h.csv");
    io::write_histogram(&r.samples[1].histogram, &hp).unwrap();
    let back = io::read_histogram_masses(&hp).unwrap();
    assert_eq!(back.len(), 66);
    let total: f64 = back.iter().map(|x| x.2).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn config_validation() {
    let f = bimodal();
    for bad in [
        WalkConfig { n: 1, ..Default::default() },
        WalkConfig { gamma: 1.2, ..Default::default() },
        WalkConfig { t_end: 0.0, ..Default::default() },
        WalkConfig { bins: 1, ..Default::default() },
        WalkConfig { sample_times: vec![2.0], ..Default::default() },
    ] {
        assert!(matches!(run_walk(&bad, &f), Err(WalkError::InvalidConfig(_))));
    }
}
