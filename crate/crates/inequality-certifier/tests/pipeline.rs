use std::sync::OnceLock;

use density_core::{maxwellian, Builtin, Grid, GridDensity};
use inequality_certifier::*;
use kac_boltzmann_solver::{solve, SolverConfig};
use sphere_states::{g_concentration_profile, ConcentrationProfile, ConditionedTensor, LogPowerForm, ProfileOptions};

struct Fixture {
    f: GridDensity,
    tensors: Vec<ConditionedTensor>,
    profile: ConcentrationProfile,
}

fn bimodal() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let f = Builtin::BIMODAL_DEFAULT.sample_unit_energy(&Grid::default()).unwrap();
        let tensors = [100, 1000].iter().map(|&n| ConditionedTensor::new(&f, n).unwrap()).collect();
        let profile = g_concentration_profile(&f, &[20, 80, 320], ProfileOptions::default()).unwrap();
        Fixture { f, tensors, profile }
    })
}

fn refs(fx: &Fixture) -> Vec<&ConditionedTensor> {
    fx.tensors.iter().collect()
}

fn tail_form(f: &GridDensity) -> LogPowerForm {
    let t = f.tail_model().unwrap();
    LogPowerForm::Tail { c1: t.c1, a1: t.a1 }
}

fn maxwell() -> (GridDensity, ConditionedTensor) {
    let m = maxwellian(1.0, &Grid::default()).unwrap();
    let ct = ConditionedTensor::new(&m, 100).unwrap();
    (m, ct)
}

#[test]
fn villani_holds_for_bimodal() {
    for ct in &bimodal().tensors {
        let r = certify_villani(ct).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", summary_line(&r));
        assert!(r.ratio() >= 1.0 && r.details["lhs_over_rhs"] == r.ratio());
        assert!(r.tolerance > 0.0 && r.tolerance < 1e-3 * r.lhs);
    }
}

#[test]
fn villani_at_equilibrium_is_zero_against_zero() {
    let (_, ct) = maxwell();
    let r = certify_villani(&ct).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12 && r.margin.abs() < 1e-12);
}

#[test]
fn log_scalable_inequality_polynomial_and_exponential() {
    let fx = bimodal();
    let fam = log_scalable_family(&fx.f, &refs(fx), Mode::Polynomial { k: 2.0 }).unwrap();
    assert!(fam.hypotheses.iter().all(|h| h.status == HypothesisStatus::Holds), "{:?}", fam.hypotheses);
    for ct in &fx.tensors {
        for gamma in [0.0, 0.5] {
            let r = certify_thm22(ct, gamma, &fam).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{}", summary_line(&r));
            assert!((r.details["constant_numeric"] / r.constant_value - 1.0).abs() < 1e-10);
            assert_eq!(r.params.moments["M_4"], fam.moment.unwrap());
        }
    }
    let fam = log_scalable_family(&fx.f, &refs(fx), Mode::Exponential { a: 0.1, mu: 1.0 }).unwrap();
    for ct in &fx.tensors {
        let r = certify_thm22(ct, 0.0, &fam).unwrap();
        assert_eq!((r.theorem_id.as_str(), r.verdict), ("thm22-ii", Verdict::Pass), "{}", summary_line(&r));
        assert!(r.rhs > 0.0);
    }
}

#[test]
fn log_scalable_inequality_at_equilibrium_and_without_tails() {
    let (m, ct) = maxwell();
    let fam = log_scalable_family(&m, &[&ct], Mode::Polynomial { k: 2.0 }).unwrap();
    let r = certify_thm22(&ct, 0.0, &fam).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.rhs.abs() < 1e-20);
    // same values, no declared tail
    let fx = bimodal();
    let bare = GridDensity::from_values(*fx.f.grid(), fx.f.values().to_vec()).unwrap();
    let fam = log_scalable_family(&bare, &refs(fx), Mode::Polynomial { k: 2.0 }).unwrap();
    assert!(fam.constant.is_none());
    let r = certify_thm22(&fx.tensors[0], 0.0, &fam).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert!(r.notes.iter().any(|n| n.contains("tail")), "{:?}", r.notes);
}

#[test]
fn log_power_inequality_has_one_constant_for_all_n() {
    let fx = bimodal();
    let fam = log_power_family(&fx.f, &refs(fx), 1.0, Mode::Polynomial { k: 3.0 }, tail_form(&fx.f), 0.5, &fx.profile)
        .unwrap();
    assert!(fam.hypotheses.iter().all(|h| h.status == HypothesisStatus::Holds), "{:?}", fam.hypotheses);
    for gamma in [0.0, 0.5] {
        let reps: Vec<TheoremReport> = fx.tensors.iter().map(|ct| certify_thm23(ct, gamma, 1.0, &fam).unwrap()).collect();
        for r in &reps {
            assert_eq!(r.verdict, Verdict::Pass, "{}", summary_line(r));
            assert!(r.details["constant_derived"] <= r.constant_value);
        }
        let (a, b) = (reps[0].constant_value, reps[1].constant_value);
        assert!((a - b).abs() <= 1e-12 * a.abs(), "{a} vs {b}");
    }
    assert!(matches!(certify_thm23(&fx.tensors[0], 0.0, 1.0, &FamilyConstants {
        mode: Mode::Polynomial { k: 2.0 },
        ..fam.clone()
    }), Err(CertifyError::Hypothesis(_))));
}

#[test]
fn log_power_inequality_exponential_and_equilibrium() {
    let fx = bimodal();
    let fam = log_power_family(&fx.f, &refs(fx), 1.0, Mode::Exponential { a: 0.1, mu: 1.0 }, tail_form(&fx.f), 0.5, &fx.profile)
        .unwrap();
    for ct in &fx.tensors {
        let r = certify_thm23(ct, 0.0, 1.0, &fam).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", summary_line(&r));
        assert!((r.rhs / r.details["rhs_derived"] - 6.0).abs() < 1e-12);
    }
    let (m, ct) = maxwell();
    let prof = g_concentration_profile(&m, &[20, 80], ProfileOptions::default()).unwrap();
    let fam = log_power_family(&m, &[&ct], 1.0, Mode::Polynomial { k: 3.0 }, tail_form(&m), 0.5, &prof).unwrap();
    let r = certify_thm23(&ct, 0.0, 1.0, &fam).unwrap();
    assert!(r.verdict == Verdict::Pass || r.verdict == Verdict::Inconclusive, "{}", summary_line(&r));
    assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-20);
}

#[test]
fn family_constants_satisfy_their_definitions() {
    let fx = bimodal();
    let sc = log_scalable_family(&fx.f, &refs(fx), Mode::Polynomial { k: 2.0 }).unwrap().scalability.unwrap();
    for ct in &fx.tensors {
        let r = certify_log_scalability(ct, &sc).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", summary_line(&r));
    }
    for form in [tail_form(&fx.f), LogPowerForm::Fisher { k: 2.0 }] {
        let lp = sphere_states::log_power_constant(&fx.f, 1.0, form, 0.5, &fx.profile).unwrap();
        for ct in &fx.tensors {
            let r = certify_log_power(ct, &lp, form).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{}", summary_line(&r));
        }
    }
}

#[test]
fn limit_constant_is_the_fisher_form_without_the_concentration_factor() {
    let fx = bimodal();
    let lp = sphere_states::log_power_constant(&fx.f, 1.0, LogPowerForm::Fisher { k: 3.0 }, 0.5, &fx.profile).unwrap();
    let inputs = thm13_inputs(&fx.f, 1.0, Mode::Polynomial { k: 3.0 }).unwrap();
    let c_f = c_f_thm13(1.0, 0.5, inputs.fisher, 3.0, inputs.m_k1b).unwrap();
    assert!((c_f * lp.g_ratio.sqrt() / lp.value - 1.0).abs() < 1e-12, "{c_f} {} {}", lp.g_ratio, lp.value);
}

#[test]
fn limit_inequality_for_bimodal_reports_the_lower_bound() {
    let fx = bimodal();
    let r = certify_thm13(&fx.f, 0.0, 1.0, Mode::Polynomial { k: 3.0 }, Thm13Options::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", summary_line(&r));
    assert!((r.details["epsilon"] - 2.0).abs() < 1e-15);
    let lb = r.hypotheses.iter().find(|h| h.name == "f >= C e^-v^2").unwrap();
    assert_eq!(lb.status, HypothesisStatus::Violated);
    assert!(!r.hypotheses_hold());
    let r = certify_thm13(&fx.f, 0.0, 1.0, Mode::Exponential { a: 0.1, mu: 1.0 }, Thm13Options::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{}", summary_line(&r));
}

#[test]
fn limit_inequality_at_equilibrium_and_for_hard_edges() {
    let (m, _) = maxwell();
    let r = certify_thm13(&m, 0.0, 1.0, Mode::Polynomial { k: 3.0 }, Thm13Options::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.hypotheses_hold(), "{:?}", r.hypotheses);
    assert!(r.rhs.abs() < 1e-20 && r.lhs.abs() < 1e-12);
    let u = Builtin::UniformEnergy.sample(&Grid::default()).unwrap();
    let r = certify_thm13(&u, 0.0, 1.0, Mode::Polynomial { k: 3.0 }, Thm13Options::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert!(certify_thm13(&m, 0.0, 1.0, Mode::Polynomial { k: 2.0 }, Thm13Options::default()).is_err());
}

#[test]
fn limit_inequality_along_a_solver_trajectory() {
    let fx = bimodal();
    let cfg = SolverConfig { t_end: 2.0, sample_times: vec![0.0, 0.5, 1.0, 2.0], ..Default::default() };
    let traj = solve(&fx.f, &cfg).unwrap();
    let reps = certify_thm13_along(&fx.f, &traj, 1.0, Mode::Polynomial { k: 3.0 }, Thm13Options::default()).unwrap();
    assert_eq!(reps.len(), 4);
    let c = reps[0].constant_value;
    for (r, rec) in reps.iter().zip(&traj.records) {
        assert_eq!(r.verdict, Verdict::Pass, "{}", summary_line(r));
        assert_eq!(r.constant_value, c);
        // lhs is the dissipation the solver reports at the same time
        let d = rec.d.unwrap();
        assert!((r.lhs - d).abs() <= 1e-9 * d.max(1e-12), "{} vs {d}", r.lhs);
    }
    assert!(reps.windows(2).all(|w| w[1].rhs < w[0].rhs && w[1].lhs < w[0].lhs));
}

#[test]
fn transfer_to_the_sphere_tightens_with_n() {
    let fx = bimodal();
    let reps: Vec<TheoremReport> =
        fx.tensors.iter().map(|ct| certify_transfer_thm41(&fx.f, 1.0, 0.0, ct, 64).unwrap()).collect();
    for r in &reps {
        assert_eq!(r.verdict, Verdict::Pass, "{}", summary_line(r));
        assert!(r.details["C1"] <= 1.0 && r.details["C2"] >= 1.0 && r.details["C3"] <= r.details["C4"]);
    }
    for key in ["C1", "C2", "C3", "C4"] {
        let (a, b) = (reps[0].details[key], reps[1].details[key]);
        assert!((b - 1.0).abs() < (a - 1.0).abs(), "{key}: {a} -> {b}");
    }
    assert!(reps[1].rhs / reps[1].lhs > reps[0].rhs / reps[0].lhs);
    let (m, ct) = maxwell();
    let r = certify_transfer_thm41(&m, 1.0, 0.0, &ct, 64).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.rhs, 0.0);
}

#[test]
fn reports_are_reproducible_and_round_trip() {
    let fx = bimodal();
    let a = certify_villani(&fx.tensors[0]).unwrap();
    let b = certify_villani(&fx.tensors[0]).unwrap();
    assert_eq!(a, b);
    let fam = log_scalable_family(&fx.f, &refs(fx), Mode::Polynomial { k: 2.0 }).unwrap();
    let r = certify_thm22(&fx.tensors[0], 0.5, &fam).unwrap();
    let back: TheoremReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
    assert_eq!(back, r);
    assert_eq!(r.params.n, Some(100));
    assert_eq!(r.params.gamma, Some(0.5));
    assert_eq!(r.params.k, Some(2.0));
    assert_eq!(r.params.c_f, fam.constant);
}
