//! Constants shared by a whole family `{F_N}`: the log-scalability or
//! log-power constant and the supremum over `N` of the moment the inequality
//! uses. They are computed once so that every `N` sees the same numbers.

use density_core::{moments, GridDensity};
use serde::{Deserialize, Serialize};
use sphere_states::{
    log_power_constant, log_scalability_constant, ConcentrationProfile, ConditionedTensor, LogPowerConstant,
    LogPowerForm, ScalabilityConstant,
};

use crate::error::CertifyError;
use crate::report::{HypothesisCheck, HypothesisStatus};

/// Which moment hypothesis an inequality is used with.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Mode {
    /// `M_{2k} < ∞`.
    Polynomial { k: f64 },
    /// `∫ e^{a|v|^μ} Π₁ < ∞`.
    Exponential { a: f64, mu: f64 },
}

impl Mode {
    pub fn validate(&self) -> Result<(), CertifyError> {
        match *self {
            Mode::Polynomial { k } if !(k.is_finite() && k > 1.0) => {
                Err(CertifyError::InvalidParameter(format!("k must exceed 1, got {k}")))
            }
            Mode::Exponential { a, mu } if !(a.is_finite() && a > 0.0 && mu.is_finite() && mu > 0.0) => {
                Err(CertifyError::InvalidParameter(format!("a and mu must be positive, got ({a}, {mu})")))
            }
            _ => Ok(()),
        }
    }

    pub fn moment_label(&self) -> String {
        match *self {
            Mode::Polynomial { k } => format!("M_{}", 2.0 * k),
            Mode::Exponential { .. } => "M_exp".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyConstants {
    pub mode: Mode,
    /// `C_F` (log-scalable) or `C` (log-power); `None` when it could not be
    /// established.
    pub constant: Option<f64>,
    /// Supremum of the moment over the supplied `N` and the limit `f`.
    pub moment: Option<f64>,
    pub hypotheses: Vec<HypothesisCheck>,
    pub scalability: Option<ScalabilityConstant>,
    pub log_power: Option<LogPowerConstant>,
}

/// The moment of `f` itself (the `N → ∞` member of the family), with its
/// divergence and truncation flags turned into a hypothesis check.
pub fn limit_moment(f: &GridDensity, mode: Mode) -> Result<(f64, HypothesisCheck), CertifyError> {
    let label = mode.moment_label();
    let (value, divergent, truncated) = match mode {
        Mode::Polynomial { k } => {
            let rep = moments(f, &[k], None)?;
            let m = &rep.m_2k[0];
            (m.value, m.divergent, m.truncation_warning)
        }
        Mode::Exponential { a, mu } => {
            let rep = moments(f, &[], Some((a, mu)))?;
            let m = rep.m_exp.expect("exponential moment requested");
            (m.value, m.divergent, m.truncation_warning)
        }
    };
    let check = if divergent {
        HypothesisCheck::new(&label, HypothesisStatus::Violated, "divergent for the declared tail")
    } else if truncated || !value.is_finite() {
        HypothesisCheck::new(&label, HypothesisStatus::Unverifiable, "not resolved on the grid")
    } else {
        HypothesisCheck::holds(&label, format!("{value:.6e}"))
    };
    Ok((value, check))
}

fn family_moment(
    f: &GridDensity,
    tensors: &[&ConditionedTensor],
    mode: Mode,
) -> Result<(Option<f64>, HypothesisCheck), CertifyError> {
    let (mut sup, check) = limit_moment(f, mode)?;
    if check.status == HypothesisStatus::Violated {
        return Ok((None, check));
    }
    for ct in tensors {
        let m = match mode {
            Mode::Polynomial { k } => ct.marginal_moment(2.0 * k)?,
            Mode::Exponential { a, mu } => ct.marginal_exp_moment(a, mu)?,
        };
        sup = sup.max(m.value + m.error);
    }
    let check = HypothesisCheck { detail: format!("sup over N = {sup:.6e}"), ..check };
    Ok((Some(sup), check))
}

/// `C_F` from the declared tail of `f` and `ln Z_N` of each tensor, and the
/// moment supremum. No declared tail leaves `C_F` unverifiable.
pub fn log_scalable_family(
    f: &GridDensity,
    tensors: &[&ConditionedTensor],
    mode: Mode,
) -> Result<FamilyConstants, CertifyError> {
    mode.validate()?;
    let mut hypotheses = Vec::new();
    let mut scalability = None;
    match f.tail_model() {
        None => hypotheses.push(HypothesisCheck::new(
            "log-scalable",
            HypothesisStatus::Unverifiable,
            "no tail bounds declared for f",
        )),
        Some(tail) => {
            let log_z: Vec<(usize, f64)> = tensors.iter().map(|ct| (ct.n(), ct.log_z())).collect();
            match log_scalability_constant(f, tail, &log_z) {
                Ok(sc) => {
                    hypotheses.push(HypothesisCheck::holds("log-scalable", format!("C_F = {:.6e}", sc.value)));
                    scalability = Some(sc);
                }
                Err(e) => hypotheses.push(HypothesisCheck::new("log-scalable", HypothesisStatus::Violated, e.to_string())),
            }
        }
    }
    let (moment, check) = family_moment(f, tensors, mode)?;
    hypotheses.push(check);
    Ok(FamilyConstants {
        mode,
        constant: scalability.as_ref().map(|s| s.value),
        moment,
        hypotheses,
        scalability,
        log_power: None,
    })
}

/// The log-power constant `C` of order `β` and the moment supremum. The
/// defining bound `LP_N ≤ C^{1+β}` is checked at every supplied `N`.
#[allow(clippy::too_many_arguments)]
pub fn log_power_family(
    f: &GridDensity,
    tensors: &[&ConditionedTensor],
    beta: f64,
    mode: Mode,
    form: LogPowerForm,
    eps: f64,
    profile: &ConcentrationProfile,
) -> Result<FamilyConstants, CertifyError> {
    mode.validate()?;
    let lp = log_power_constant(f, beta, form, eps, profile)?;
    let mut hypotheses = vec![if lp.lower_bound_holds {
        HypothesisCheck::holds("lower bound f >= e^-phi", "holds at every node")
    } else {
        HypothesisCheck::new("lower bound f >= e^-phi", HypothesisStatus::Violated, "fails on the grid")
    }];
    let bound = lp.value.powf(1.0 + beta);
    for ct in tensors {
        let e = ct.log_power_integral(beta)?;
        let name = format!("log-power at N={}", ct.n());
        let detail = format!("LP = {:.6e} vs C^(1+beta) = {bound:.6e}", e.value);
        let status = if e.value - 10.0 * e.error <= bound { HypothesisStatus::Holds } else { HypothesisStatus::Violated };
        hypotheses.push(HypothesisCheck::new(&name, status, detail));
    }
    if !profile.residual_decreasing {
        hypotheses.push(HypothesisCheck::new(
            "g-concentration",
            HypothesisStatus::Unverifiable,
            "profile residual does not decrease with N",
        ));
    }
    let (moment, check) = family_moment(f, tensors, mode)?;
    hypotheses.push(check);
    Ok(FamilyConstants { mode, constant: Some(lp.value), moment, hypotheses, scalability: None, log_power: Some(lp) })
}
