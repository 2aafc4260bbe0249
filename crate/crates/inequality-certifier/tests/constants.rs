use inequality_certifier::*;
use proptest::prelude::*;

#[test]
fn thm22_golden_value_by_two_paths() {
    // (k−1)/(3^4) · (1/2)^2 / (2·1·(1+6)) / 100 = 1/453600
    let c = constant_thm22i(2.0, 0.0, 100, 1.0, 3.0).unwrap();
    assert!((c - 1.0 / 453_600.0).abs() < 1e-15 * c.abs().max(1e-300) + 1e-22, "{c}");
    let n = constant_thm22i_numeric(2.0, 0.0, 100, 1.0, 3.0).unwrap();
    assert!((n / c - 1.0).abs() < 1e-10, "closed {c} numeric {n}");
}

#[test]
fn thm22_closed_form_matches_optimization_across_parameters() {
    for &(k, g, cf, m, n) in &[(1.5, 0.0, 0.3, 1.0, 10), (3.0, 0.5, 17.4, 1.76, 1000), (6.0, 0.9, 2.0, 40.0, 7)] {
        let c = constant_thm22i(k, g, n, cf, m).unwrap();
        let num = constant_thm22i_numeric(k, g, n, cf, m).unwrap();
        assert!((num / c - 1.0).abs() < 1e-10, "k={k} γ={g}: {c} vs {num}");
    }
}

#[test]
fn thm22_scales_exactly_with_n() {
    for &(k, g) in &[(2.0, 0.0), (3.0, 0.5), (1.25, 0.75)] {
        let c1 = constant_thm22i(k, g, 100, 1.7, 2.0).unwrap();
        let c2 = constant_thm22i(k, g, 200, 1.7, 2.0).unwrap();
        let want = 2f64.powf((g - 1.0) / (k - 1.0));
        assert!((c2 / c1 / want - 1.0).abs() < 1e-14);
    }
}

#[test]
fn thm22_tends_to_villani_as_gamma_tends_to_one() {
    let near: Vec<f64> =
        [0.99, 0.999, 0.9999].iter().map(|&g| constant_thm22i(2.0, g, 100, 1.0, 3.0).unwrap()).collect();
    let gaps: Vec<f64> = near.iter().map(|c| (c - 1.0 / 3.0).abs()).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{near:?}");
    // the approach is like (1−γ) ln(1/(1−γ)): slow but steady
    assert!(gaps[2] < 0.003 / 3.0 && gaps[2] < 0.2 * gaps[1], "{near:?}");
}

#[test]
fn thm22_rejects_inadmissible_parameters() {
    assert!(constant_thm22i(1.0, 0.0, 100, 1.0, 3.0).is_err());
    assert!(constant_thm22i(0.5, 0.0, 100, 1.0, 3.0).is_err());
    assert!(constant_thm22i(2.0, 1.0, 100, 1.0, 3.0).is_err());
    assert!(constant_thm22i(2.0, 0.0, 100, 0.0, 3.0).is_err());
    assert!(constant_thm22i(2.0, 0.0, 0, 1.0, 3.0).is_err());
}

#[test]
fn thm23_exponent_limits_and_rejection() {
    for &(k, g) in &[(3.0, 0.0), (2.5, 0.5)] {
        let e = epsilon_thm23(k, g, 1e9).unwrap();
        assert!((e - (1.0 - g) / (k - 1.0)).abs() < 1e-8, "{e}");
    }
    assert!((epsilon_thm23(3.0, 0.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
    assert!(matches!(epsilon_thm23(2.0, 0.0, 1.0), Err(CertifyError::Hypothesis(_))));
    assert!(matches!(epsilon_thm23(1.5, 0.0, 1.0), Err(CertifyError::Hypothesis(_))));
    assert!(constant_thm23i_displayed(2.0, 0.0, 1.0, 1.0, 1.0).is_err());
}

#[test]
fn thm23_derived_constant_matches_optimization() {
    for &(k, g, b, c, m) in &[(3.0, 0.0, 1.0, 181.0, 1.76), (4.0, 0.5, 0.5, 2.0, 10.0), (2.2, 0.25, 3.0, 0.7, 1.1)] {
        let d = constant_thm23i_derived(k, g, b, c, m).unwrap();
        let n = constant_thm23i_numeric(k, g, b, c, m).unwrap();
        assert!((n / d - 1.0).abs() < 1e-10, "{d} vs {n}");
        let shown = constant_thm23i_displayed(k, g, b, c, m).unwrap();
        let (dd, ee) = (k * b - (1.0 + b), k * b - g * (1.0 + b));
        assert!((shown / d / (ee / dd).powf(ee / dd) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn thm23_displayed_constant_by_hand() {
    // k = 3, β = 1, γ = 0: D = 1, p = 3, inner 2^3, lead 1/2, 2^1 / 3^6 / (C^2 (1+2M))
    let c = constant_thm23i_displayed(3.0, 0.0, 1.0, 2.0, 1.0).unwrap();
    let hand = 0.5 * 8.0 * 2.0 / 729.0 / (4.0 * 3.0);
    assert!((c / hand - 1.0).abs() < 1e-14, "{c} vs {hand}");
}

#[test]
fn envelope_starts_at_h0_and_halves_on_time() {
    let (h0, c, n, k, g) = (0.6, 0.02, 1000, 3.0, 0.0);
    let e = decay_envelope_thm24(h0, c, n, k, g, &[0.0]).unwrap();
    assert_eq!(e[0], h0);
    let t_half = half_time_thm24(h0, c, n, k, g).unwrap();
    let at = decay_envelope_thm24(h0, c, n, k, g, &[t_half]).unwrap()[0];
    assert!((at / (0.5 * h0) - 1.0).abs() < 1e-12, "{at}");
    let times: Vec<f64> = (0..200).map(|i| i as f64 * 10.0).collect();
    let e = decay_envelope_thm24(h0, c, n, k, g, &times).unwrap();
    assert!(e.windows(2).all(|w| w[1] <= w[0]));
    // more moments give a faster envelope at this t
    let by_k: Vec<f64> =
        [2.0, 3.0, 5.0, 10.0].iter().map(|&k| decay_envelope_thm24(0.5, 1.0, 100, k, 0.0, &[10.0]).unwrap()[0]).collect();
    assert!(by_k.windows(2).all(|w| w[1] < w[0]), "{by_k:?}");
}

#[test]
fn envelope_rejects_gamma_one_and_bad_inputs() {
    assert!(decay_envelope_thm24(0.5, 1.0, 100, 3.0, 1.0, &[1.0]).is_err());
    assert!(decay_envelope_thm24(0.5, 0.0, 100, 3.0, 0.0, &[1.0]).is_err());
    assert!(decay_envelope_thm24(0.5, 1.0, 100, 1.0, 0.0, &[1.0]).is_err());
    assert!(decay_envelope_thm24(0.5, 1.0, 100, 3.0, 0.0, &[-1.0]).is_err());
}

#[test]
fn envelope_constant_is_the_sphere_constant_without_n() {
    let c = constant_thm24(3.0, 0.5, 1.7, 2.0).unwrap();
    let c_n = constant_thm22i(3.0, 0.5, 400, 1.7, 2.0).unwrap();
    assert!((c_n * 400f64.powf(0.25) / c - 1.0).abs() < 1e-14);
}

#[test]
fn c_f_matches_hand_assembly() {
    // β = 1, ε = ½, I = 1, k = 2: C_ε = 2/e, C_{2,1} = 2^5 · 3π/4
    let c = c_f_thm13(1.0, 0.5, 1.0, 2.0, 3.0).unwrap();
    let ce = 2.0 / std::f64::consts::E;
    let ckb = 32.0 * 0.75 * std::f64::consts::PI;
    let hand = (8.0 * 3f64.sqrt() * (2.0 * ce * ce + (1.0 + ckb) * 3.0)).sqrt();
    assert!((c / hand - 1.0).abs() < 1e-12, "{c} vs {hand}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constants_are_positive(k in 1.05f64..8.0, g in 0.0f64..0.99, cf in 0.01f64..100.0, m in 0.1f64..100.0, n in 1usize..100_000) {
        let c = constant_thm22i(k, g, n, cf, m).unwrap();
        prop_assert!(c > 0.0 && c.is_finite());
        let c24 = constant_thm24(k, g, cf, m).unwrap();
        prop_assert!(c24 >= c);
    }

    #[test]
    fn log_power_constants_are_positive(b in 0.2f64..5.0, extra in 0.05f64..6.0, g in 0.0f64..0.99, c in 0.01f64..100.0, m in 0.1f64..100.0) {
        let k = 1.0 + 1.0 / b + extra;
        let shown = constant_thm23i_displayed(k, g, b, c, m).unwrap();
        let derived = constant_thm23i_derived(k, g, b, c, m).unwrap();
        prop_assert!(derived > 0.0 && shown >= derived);
    }

    #[test]
    fn envelope_is_monotone_in_time(h0 in 0.01f64..5.0, c in 1e-4f64..10.0, k in 1.1f64..6.0, g in 0.0f64..0.95, t in 0.0f64..100.0, dt in 0.0f64..100.0) {
        let e = decay_envelope_thm24(h0, c, 100, k, g, &[t, t + dt]).unwrap();
        prop_assert!(e[1] <= e[0] && e[0] <= h0 * (1.0 + 1e-12));
    }
}
