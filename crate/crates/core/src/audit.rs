//! Inequality instances with both sides, margin and verdict.

use serde::{Deserialize, Serialize};

/// Default additive slack for audited inequalities.
pub const SLACK: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub inequality: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs` for inequalities, `−|lhs − rhs|` for identities.
    pub margin: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub case: String,
    /// Reported for comparison only; never counted as a failure.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub informational: bool,
}

impl AuditReport {
    /// `lhs ≤ rhs + slack`.
    pub fn leq(inequality: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        Self {
            inequality: inequality.to_string(),
            kappa: None,
            lhs,
            rhs,
            margin: rhs - lhs,
            pass: lhs <= rhs + slack,
            case: String::new(),
            informational: false,
        }
    }

    /// `|lhs − rhs| ≤ slack`.
    pub fn eq(inequality: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        let diff = (lhs - rhs).abs();
        Self {
            inequality: inequality.to_string(),
            kappa: None,
            lhs,
            rhs,
            margin: -diff,
            pass: diff <= slack,
            case: String::new(),
            informational: false,
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    pub fn with_case(mut self, case: impl Into<String>) -> Self {
        self.case = case.into();
        self
    }
}

/// Failed reports, informational ones excluded.
pub fn failures(reports: &[AuditReport]) -> Vec<&AuditReport> {
    reports.iter().filter(|r| !r.pass && !r.informational).collect()
}
