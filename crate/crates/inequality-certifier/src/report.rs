//! Reports: both sides of one inequality, the constant used, and a verdict
//! against an explicit tolerance budget.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Multiplier applied to estimated quadrature errors to form the tolerance.
pub const TOLERANCE_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The numbers could not be trusted, or a hypothesis could not be checked.
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisStatus {
    Holds,
    Violated,
    Unverifiable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub status: HypothesisStatus,
    pub detail: String,
}

impl HypothesisCheck {
    pub fn new(name: &str, status: HypothesisStatus, detail: impl Into<String>) -> Self {
        HypothesisCheck { name: name.to_string(), status, detail: detail.into() }
    }

    pub fn holds(name: &str, detail: impl Into<String>) -> Self {
        Self::new(name, HypothesisStatus::Holds, detail)
    }
}

/// Every input that went into a report. Absent entries do not apply.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: Option<usize>,
    pub gamma: Option<f64>,
    pub k: Option<f64>,
    pub beta: Option<f64>,
    pub a: Option<f64>,
    pub mu: Option<f64>,
    pub eps: Option<f64>,
    pub c_f: Option<f64>,
    /// Moments (and other scalar inputs) by name, e.g. `M_6`, `M_exp`, `I`.
    pub moments: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem_id: String,
    pub params: Params,
    pub lhs: f64,
    pub rhs: f64,
    pub constant_value: f64,
    /// `lhs − rhs`.
    pub margin: f64,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub hypotheses: Vec<HypothesisCheck>,
    /// Secondary numbers: alternative constants, brackets, error estimates.
    pub details: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl TheoremReport {
    /// Assembles a report. `unreliable` marks inputs whose quadrature could
    /// not be trusted; it, or any unverifiable hypothesis, makes the verdict
    /// inconclusive. A violated hypothesis is recorded but does not change
    /// the verdict: the inequality is still evaluated.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        theorem_id: &str,
        params: Params,
        lhs: f64,
        rhs: f64,
        constant_value: f64,
        error_estimate: f64,
        hypotheses: Vec<HypothesisCheck>,
        unreliable: bool,
    ) -> Self {
        let margin = lhs - rhs;
        let tolerance = TOLERANCE_FACTOR * error_estimate.abs();
        let mut notes = Vec::new();
        let blocked = hypotheses.iter().any(|h| h.status == HypothesisStatus::Unverifiable);
        for h in &hypotheses {
            if h.status != HypothesisStatus::Holds {
                notes.push(format!("{} {:?}: {}", h.name, h.status, h.detail).to_lowercase());
            }
        }
        let finite = lhs.is_finite() && rhs.is_finite();
        let verdict = if unreliable || blocked || !finite {
            if unreliable {
                notes.push("quadrature flagged unreliable".into());
            }
            Verdict::Inconclusive
        } else if margin >= -tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        TheoremReport {
            theorem_id: theorem_id.to_string(),
            params,
            lhs,
            rhs,
            constant_value,
            margin,
            verdict,
            tolerance,
            hypotheses,
            details: BTreeMap::new(),
            notes,
        }
    }

    pub fn with_detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// `lhs / rhs`, infinite when the rhs vanishes.
    pub fn ratio(&self) -> f64 {
        if self.rhs > 0.0 {
            self.lhs / self.rhs
        } else {
            f64::INFINITY
        }
    }

    /// Whether every hypothesis was checked and holds.
    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|h| h.status == HypothesisStatus::Holds)
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self)
    }
}

/// One line per report: id, N, sides, margin, verdict.
pub fn summary_line(r: &TheoremReport) -> String {
    let n = r.params.n.map(|n| format!(" N={n}")).unwrap_or_default();
    format!(
        "{}{}: lhs={:.6e} rhs={:.6e} margin={:.3e} tol={:.1e} {:?}",
        r.theorem_id, n, r.lhs, r.rhs, r.margin, r.tolerance, r.verdict
    )
}
