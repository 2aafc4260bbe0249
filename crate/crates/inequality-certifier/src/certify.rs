//! Both sides of each inequality, evaluated on conditioned tensorisations
//! (sphere inequalities) or on one-particle densities (limit inequalities).

use density_core::{fisher_information, moments, GridDensity};
use kac_boltzmann_solver::{entropy_h, entropy_production_dgamma, Trajectory};
use serde::{Deserialize, Serialize};
use sphere_states::{ConditionedTensor, Estimate, LogPowerConstant, LogPowerForm, ScalabilityConstant};

use crate::constants::{
    c_f_thm13, constant_thm22i, constant_thm22i_numeric, constant_thm23i_derived, constant_thm23i_displayed,
    constants_thm13_exp, epsilon_thm23, exponent_thm22, rhs_thm22ii, rhs_thm23ii_derived, rhs_thm23ii_displayed,
};
use crate::error::CertifyError;
use crate::family::{limit_moment, FamilyConstants, Mode};
use crate::report::{HypothesisCheck, HypothesisStatus, Params, TheoremReport};

/// An estimate is unreliable when its error is not small next to it.
fn unreliable(e: &Estimate) -> bool {
    !e.error.is_finite() || (e.value.abs() > 1e-8 && e.error > 0.1 * e.value.abs())
}

fn base_params(ct: &ConditionedTensor, gamma: f64) -> Params {
    Params { n: Some(ct.n()), gamma: Some(gamma), ..Default::default() }
}

/// `D_{N,1}(F_N) ≥ H_N(F_N)/3`.
pub fn certify_villani(ct: &ConditionedTensor) -> Result<TheoremReport, CertifyError> {
    let h = ct.entropy_hn()?;
    let d = ct.entropy_production_dn(1.0)?;
    let rhs = h.value.max(0.0) / 3.0;
    let hyp = vec![HypothesisCheck::holds("finite entropy", format!("H_N = {:.6e}", h.value))];
    let r = TheoremReport::assemble(
        "villani",
        base_params(ct, 1.0),
        d.value,
        rhs,
        1.0 / 3.0,
        d.error + h.error / 3.0,
        hyp,
        unreliable(&h) || unreliable(&d),
    );
    let ratio = r.ratio();
    Ok(r.with_detail("lhs_over_rhs", ratio).with_detail("H_N", h.value))
}

fn family_params(p: &mut Params, fam: &FamilyConstants) {
    match fam.mode {
        Mode::Polynomial { k } => p.k = Some(k),
        Mode::Exponential { a, mu } => {
            p.a = Some(a);
            p.mu = Some(mu);
        }
    }
    p.c_f = fam.constant;
    if let Some(m) = fam.moment {
        p.moments.insert(fam.mode.moment_label(), m);
    }
}

/// Reports whose constant could not be formed: both sides are still shown,
/// the verdict is inconclusive.
fn missing_constant(id: &str, params: Params, lhs: f64, hyp: Vec<HypothesisCheck>) -> TheoremReport {
    let mut hyp = hyp;
    if hyp.iter().all(|h| h.status != HypothesisStatus::Unverifiable) {
        hyp.push(HypothesisCheck::new("constant", HypothesisStatus::Unverifiable, "family constant missing"));
    }
    TheoremReport::assemble(id, params, lhs, f64::NAN, f64::NAN, 0.0, hyp, false)
}

/// First-order propagation of the entropy error through `rhs(x)`.
fn propagate(rhs: impl Fn(f64) -> Result<f64, CertifyError>, x: f64, dx: f64) -> Result<f64, CertifyError> {
    if x <= 0.0 || dx <= 0.0 {
        return Ok(0.0);
    }
    let up = rhs(x + dx)?;
    let down = rhs((x - dx).max(0.0))?;
    Ok(0.5 * (up - down).abs())
}

/// The log-scalable inequality at one `N`:
/// `D_{N,γ}/N ≥ C_{k,γ,N} (H_N/N)^{1+(1−γ)/(k−1)}` (polynomial mode) or the
/// logarithmic form (exponential mode).
pub fn certify_thm22(ct: &ConditionedTensor, gamma: f64, fam: &FamilyConstants) -> Result<TheoremReport, CertifyError> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(CertifyError::InvalidParameter(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    let nf = ct.n() as f64;
    let h = ct.entropy_hn()?;
    let d = ct.entropy_production_dn(gamma)?;
    let (x, dx) = (h.value.max(0.0) / nf, h.error / nf);
    let lhs = d.value / nf;
    let mut params = base_params(ct, gamma);
    family_params(&mut params, fam);
    let (Some(c_f), Some(m)) = (fam.constant, fam.moment) else {
        return Ok(missing_constant("thm22", params, lhs, fam.hypotheses.clone()));
    };
    let flag = unreliable(&h) || unreliable(&d);
    let report = match fam.mode {
        Mode::Polynomial { k } => {
            let c = constant_thm22i(k, gamma, ct.n(), c_f, m)?;
            let p = exponent_thm22(k, gamma);
            let rhs = c * x.powf(p);
            let err = d.error / nf + propagate(|y| Ok(c * y.powf(p)), x, dx)?;
            TheoremReport::assemble("thm22-i", params, lhs, rhs, c, err, fam.hypotheses.clone(), flag)
                .with_detail("constant_numeric", constant_thm22i_numeric(k, gamma, ct.n(), c_f, m)?)
                .with_detail("exponent", p)
        }
        Mode::Exponential { a, mu } => {
            let f = |y: f64| rhs_thm22ii(y, ct.n(), gamma, c_f, a, mu, m);
            let rhs = f(x)?;
            let err = d.error / nf + propagate(f, x, dx)?;
            let ratio = if x > 0.0 { rhs / x } else { 0.0 };
            TheoremReport::assemble("thm22-ii", params, lhs, rhs, ratio, err, fam.hypotheses.clone(), flag)
        }
    };
    Ok(report.with_detail("H_N_per_N", x))
}

/// The log-power inequality at one `N`, with the `N`-independent constant.
/// The verdict uses the displayed constant; the value its proof produces is
/// reported alongside (`constant_derived`, `rhs_derived`).
pub fn certify_thm23(
    ct: &ConditionedTensor,
    gamma: f64,
    beta: f64,
    fam: &FamilyConstants,
) -> Result<TheoremReport, CertifyError> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(CertifyError::InvalidParameter(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    if let Mode::Polynomial { k } = fam.mode {
        epsilon_thm23(k, gamma, beta)?;
    }
    let nf = ct.n() as f64;
    let h = ct.entropy_hn()?;
    let d = ct.entropy_production_dn(gamma)?;
    let (x, dx) = (h.value.max(0.0) / nf, h.error / nf);
    let lhs = d.value / nf;
    let mut params = base_params(ct, gamma);
    params.beta = Some(beta);
    params.eps = fam.log_power.as_ref().map(|l| l.eps);
    family_params(&mut params, fam);
    let (Some(c), Some(m)) = (fam.constant, fam.moment) else {
        return Ok(missing_constant("thm23", params, lhs, fam.hypotheses.clone()));
    };
    let flag = unreliable(&h) || unreliable(&d);
    let report = match fam.mode {
        Mode::Polynomial { k } => {
            let eps = epsilon_thm23(k, gamma, beta)?;
            let shown = constant_thm23i_displayed(k, gamma, beta, c, m)?;
            let derived = constant_thm23i_derived(k, gamma, beta, c, m)?;
            let rhs = shown * x.powf(1.0 + eps);
            let err = d.error / nf + propagate(|y| Ok(shown * y.powf(1.0 + eps)), x, dx)?;
            TheoremReport::assemble("thm23-i", params, lhs, rhs, shown, err, fam.hypotheses.clone(), flag)
                .with_detail("epsilon", eps)
                .with_detail("constant_derived", derived)
                .with_detail("rhs_derived", derived * x.powf(1.0 + eps))
        }
        Mode::Exponential { a, mu } => {
            let f = |y: f64| rhs_thm23ii_displayed(y, gamma, c, beta, a, mu, m);
            let rhs = f(x)?;
            let err = d.error / nf + propagate(f, x, dx)?;
            let ratio = if x > 0.0 { rhs / x } else { 0.0 };
            TheoremReport::assemble("thm23-ii", params, lhs, rhs, ratio, err, fam.hypotheses.clone(), flag)
                .with_detail("rhs_derived", rhs_thm23ii_derived(x, gamma, c, beta, a, mu, m)?)
        }
    };
    Ok(report.with_detail("H_N_per_N", x))
}

/// `C_F ≥ sup |ln F_N| / N`, the supremum sampled over two-speed
/// configurations (`j` particles at speed `s`, the rest sharing the
/// remaining energy) where `f` is above the floor.
pub fn certify_log_scalability(ct: &ConditionedTensor, sc: &ScalabilityConstant) -> Result<TheoremReport, CertifyError> {
    let f = ct.base();
    let n = ct.n();
    let nf = n as f64;
    let lz = ct.log_z();
    let top = f.max_value();
    let reach = f
        .grid()
        .nodes()
        .into_iter()
        .zip(f.values())
        .filter(|(_, &y)| y >= 1e-200 * top)
        .map(|(v, _)| v.abs())
        .fold(0.0, f64::max);
    let mut sup: f64 = (nf * f.ln_eval(1.0) - lz).abs() / nf;
    let mut js: Vec<usize> = vec![1, 2, n / 10, n / 4, n / 2, n - 1];
    js.retain(|&j| j >= 1 && j < n);
    js.dedup();
    for j in js {
        let jf = j as f64;
        let s_max = (nf / jf).sqrt().min(reach);
        for i in 0..=256 {
            let s = s_max * i as f64 / 256.0;
            let rest = (nf - jf * s * s) / (nf - jf);
            if rest < 0.0 || rest.sqrt() > reach {
                continue;
            }
            let ln = jf * f.ln_eval(s) + (nf - jf) * f.ln_eval(rest.sqrt()) - lz;
            sup = sup.max(ln.abs() / nf);
        }
    }
    let params = Params { n: Some(n), c_f: Some(sc.value), ..Default::default() };
    let hyp = vec![HypothesisCheck::holds("declared tail bounds", "validated when C_F was formed")];
    Ok(TheoremReport::assemble("thm34", params, sc.value, sup, sc.value, 1e-12 * sup, hyp, false)
        .with_detail("tail_part", sc.tail_part)
        .with_detail("z_part", sc.z_part)
        .with_note("rhs is a sampled supremum over two-speed configurations"))
}

/// `C^{1+β} ≥ LP_N`, the log-power property at one `N` for the constant of
/// the Φ form (`thm35`) or the Fisher form (`prop37`).
pub fn certify_log_power(
    ct: &ConditionedTensor,
    lp: &LogPowerConstant,
    form: LogPowerForm,
) -> Result<TheoremReport, CertifyError> {
    let e = ct.log_power_integral(lp.beta)?;
    let id = match form {
        LogPowerForm::Fisher { .. } => "prop37",
        _ => "thm35",
    };
    let mut params =
        Params { n: Some(ct.n()), beta: Some(lp.beta), eps: Some(lp.eps), c_f: Some(lp.value), ..Default::default() };
    if let LogPowerForm::Fisher { k } | LogPowerForm::Phi { k, .. } = form {
        params.k = Some(k);
    }
    params.moments.insert("M_phi".into(), lp.m_phi);
    params.moments.insert("M_avg".into(), lp.m_avg);
    let hyp = vec![if lp.lower_bound_holds {
        HypothesisCheck::holds("lower bound f >= e^-phi", "holds at every node")
    } else {
        HypothesisCheck::new("lower bound f >= e^-phi", HypothesisStatus::Violated, "fails on the grid")
    }];
    let lhs = lp.value.powf(1.0 + lp.beta);
    Ok(TheoremReport::assemble(id, params, lhs, e.value, lp.value, e.error, hyp, unreliable(&e))
        .with_detail("g_ratio", lp.g_ratio))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thm13Options {
    /// The ε of `C_ε = sup_{x≥1} ln x / x^ε`.
    pub eps: f64,
    pub theta_nodes: usize,
}

impl Default for Thm13Options {
    fn default() -> Self {
        Thm13Options { eps: 0.5, theta_nodes: 64 }
    }
}

/// The quantities of `f` that enter the limit constant. Over a trajectory
/// the componentwise maximum is used, which only lowers the constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm13Inputs {
    pub fisher: f64,
    /// `M_{k(1+β)}(f)`, `k` the lower-bound order.
    pub m_k1b: f64,
    /// `M_{2k}(f)` or `M_exp(f)`.
    pub moment: f64,
}

impl Thm13Inputs {
    pub fn max(self, o: Thm13Inputs) -> Thm13Inputs {
        Thm13Inputs { fisher: self.fisher.max(o.fisher), m_k1b: self.m_k1b.max(o.m_k1b), moment: self.moment.max(o.moment) }
    }
}

/// `k` for `C_{k,β}` and the moment of order `k(1+β)`: the polynomial `k`,
/// or 2 (the Gaussian lower bound) in exponential mode.
fn lower_bound_order(mode: Mode) -> f64 {
    match mode {
        Mode::Polynomial { k } => k,
        Mode::Exponential { .. } => 2.0,
    }
}

pub fn thm13_inputs(f: &GridDensity, beta: f64, mode: Mode) -> Result<Thm13Inputs, CertifyError> {
    let kb = lower_bound_order(mode) * (1.0 + beta);
    let rep = moments(f, &[0.5 * kb], None)?;
    let (moment, _) = limit_moment(f, mode)?;
    Ok(Thm13Inputs { fisher: fisher_information(f), m_k1b: rep.m_2k[0].value, moment })
}

/// Hypotheses on `f`: unit energy, `M_{max(2k, k(1+β), 4)}`, finite
/// Fisher information, and `f ≥ C e^{−v²}` from the declared tail.
fn thm13_hypotheses(f: &GridDensity, beta: f64, mode: Mode) -> Result<Vec<HypothesisCheck>, CertifyError> {
    let mut out = Vec::new();
    let rep = moments(f, &[], None)?;
    out.push(if (rep.m2 - 1.0).abs() < 1e-6 {
        HypothesisCheck::holds("M_2 = 1", format!("{:.9}", rep.m2))
    } else {
        HypothesisCheck::new("M_2 = 1", HypothesisStatus::Violated, format!("M_2 = {}", rep.m2))
    });
    let k = lower_bound_order(mode);
    let order = match mode {
        Mode::Polynomial { k } => (2.0 * k).max(k * (1.0 + beta)).max(4.0),
        Mode::Exponential { .. } => (k * (1.0 + beta)).max(4.0),
    };
    let (_, check) = limit_moment(f, Mode::Polynomial { k: 0.5 * order })?;
    out.push(check);
    if let Mode::Exponential { .. } = mode {
        out.push(limit_moment(f, mode)?.1);
    }
    let fisher = fisher_information(f);
    out.push(if fisher.is_finite() && fisher > 0.0 {
        HypothesisCheck::holds("I(f) finite", format!("{fisher:.6e}"))
    } else {
        HypothesisCheck::new("I(f) finite", HypothesisStatus::Violated, format!("I = {fisher}"))
    });
    out.push(match f.tail_model() {
        None => HypothesisCheck::new("f >= C e^-v^2", HypothesisStatus::Unverifiable, "no tail bounds declared"),
        Some(t) if t.c1 > 0.0 && t.a1 <= 1.0 => {
            HypothesisCheck::holds("f >= C e^-v^2", format!("C = {:.6e} from the declared tail", t.c1))
        }
        Some(t) => HypothesisCheck::new(
            "f >= C e^-v^2",
            HypothesisStatus::Violated,
            format!("declared lower bound decays like e^(-{:.4} v^2)", t.a1),
        ),
    });
    Ok(out)
}

fn thm13_report(
    f: &GridDensity,
    gamma: f64,
    beta: f64,
    mode: Mode,
    opts: Thm13Options,
    inputs: Thm13Inputs,
    hypotheses: Vec<HypothesisCheck>,
) -> Result<TheoremReport, CertifyError> {
    let h = entropy_h(f)?.max(0.0);
    let d = entropy_production_dgamma(f, gamma, opts.theta_nodes)?;
    let k = lower_bound_order(mode);
    let c_f = c_f_thm13(beta, opts.eps, inputs.fisher, k, inputs.m_k1b)?;
    let mut params = Params { gamma: Some(gamma), beta: Some(beta), eps: Some(opts.eps), c_f: Some(c_f), ..Default::default() };
    params.moments.insert("I".into(), inputs.fisher);
    params.moments.insert(format!("M_{}", k * (1.0 + beta)), inputs.m_k1b);
    params.moments.insert(mode.moment_label(), inputs.moment);
    // H is a grid sum: its error is far below that of D
    let h_err = 1e-12;
    let report = match mode {
        Mode::Polynomial { k } => {
            params.k = Some(k);
            let eps = epsilon_thm23(k, gamma, beta)?;
            let shown = constant_thm23i_displayed(k, gamma, beta, c_f, inputs.moment)?;
            let derived = constant_thm23i_derived(k, gamma, beta, c_f, inputs.moment)?;
            let rhs = shown * h.powf(1.0 + eps);
            let err = d.error + propagate(|y| Ok(shown * y.powf(1.0 + eps)), h, h_err)?;
            TheoremReport::assemble("thm13", params, d.value, rhs, shown, err, hypotheses, d.unreliable)
                .with_detail("epsilon", eps)
                .with_detail("constant_derived", derived)
                .with_detail("rhs_derived", derived * h.powf(1.0 + eps))
        }
        Mode::Exponential { a, mu } => {
            params.a = Some(a);
            params.mu = Some(mu);
            let (c1, c2) = constants_thm13_exp(gamma, c_f, beta, a, mu, inputs.moment);
            let g = |y: f64| rhs_thm23ii_derived(y, gamma, c_f, beta, a, mu, inputs.moment);
            let rhs = g(h)?;
            let err = d.error + propagate(g, h, h_err)?;
            TheoremReport::assemble("thm13-exp", params, d.value, rhs, c1, err, hypotheses, d.unreliable)
                .with_detail("constant_2", c2)
                .with_note("exponential form assembled as the large-N limit of the log-power bound, exponent 2(1-gamma)/mu")
        }
    };
    Ok(report.with_detail("H", h).with_detail("D_error", d.error))
}

/// The limit inequality `D_γ(f) ≥ 𝒞 H(f|M)^{1+ε}` with `𝒞` assembled from
/// `C_f`, `I(f)` and the moments of `f`.
pub fn certify_thm13(
    f: &GridDensity,
    gamma: f64,
    beta: f64,
    mode: Mode,
    opts: Thm13Options,
) -> Result<TheoremReport, CertifyError> {
    mode.validate()?;
    let hyp = thm13_hypotheses(f, beta, mode)?;
    let inputs = thm13_inputs(f, beta, mode)?;
    thm13_report(f, gamma, beta, mode, opts, inputs, hyp)
}

/// The limit inequality at every sample of a solver trajectory with one
/// time-independent constant: hypotheses are checked on the initial datum
/// `f0`, and `I`, the moments, and hence `C_f` are the maxima over `f0` and
/// all samples.
pub fn certify_thm13_along(
    f0: &GridDensity,
    traj: &Trajectory,
    beta: f64,
    mode: Mode,
    opts: Thm13Options,
) -> Result<Vec<TheoremReport>, CertifyError> {
    mode.validate()?;
    let hyp = thm13_hypotheses(f0, beta, mode)?;
    let mut samples = Vec::with_capacity(traj.records.len());
    let mut inputs = thm13_inputs(f0, beta, mode)?;
    for k in 0..traj.records.len() {
        let f = traj.density(k)?;
        inputs = inputs.max(thm13_inputs(&f, beta, mode)?);
        samples.push(f);
    }
    samples
        .iter()
        .zip(&traj.records)
        .map(|(f, rec)| {
            Ok(thm13_report(f, traj.gamma, beta, mode, opts, inputs, hyp.clone())?.with_detail("t", rec.t))
        })
        .collect()
}
