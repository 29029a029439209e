//! Pass/fail reports with signed margins.

use std::fmt;

use serde::Serialize;

use crate::domain::squeeze::CertificateSummary;
use crate::point::ComplexList;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[allow(non_camel_case_types)]
pub enum ClaimId {
    LEM1_KERNEL,
    LEM2_JACOBIAN,
    THM2A_CK,
    THM2A_BK,
    THM2A_KEK,
    COR3_GROWTH,
    LEM5_PSH,
    SCHWARZ_SQUEEZE,
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Numerical resolution behind a row.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Tolerances {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ansatz_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimizer_budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
}

/// One inequality `lhs <= rhs`. `margin = (rhs - lhs) / |rhs|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub label: String,
    pub point: ComplexList,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<ComplexList>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub tolerances: Tolerances,
}

pub fn relative_margin(lhs: f64, rhs: f64) -> f64 {
    let scale = rhs.abs();
    if scale > 0.0 {
        (rhs - lhs) / scale
    } else if lhs <= 0.0 {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

impl ReportRow {
    /// Passes when `margin >= -slack`.
    pub fn check(label: impl Into<String>, point: ComplexList, lhs: f64, rhs: f64, slack: f64) -> Self {
        let margin = relative_margin(lhs, rhs);
        ReportRow {
            label: label.into(),
            point,
            direction: None,
            lhs,
            rhs,
            margin,
            pass: margin.is_finite() && margin >= -slack || margin == f64::INFINITY,
            skipped: None,
            note: None,
            tolerances: Tolerances::default(),
        }
    }

    /// Passes only when `lhs < rhs`.
    pub fn strict(label: impl Into<String>, point: ComplexList, lhs: f64, rhs: f64) -> Self {
        let mut row = Self::check(label, point, lhs, rhs, 0.0);
        row.pass = lhs < rhs;
        row
    }

    pub fn skipped(label: impl Into<String>, point: ComplexList, reason: impl Into<String>) -> Self {
        ReportRow {
            label: label.into(),
            point,
            direction: None,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            pass: false,
            skipped: Some(reason.into()),
            note: None,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_direction(mut self, v: ComplexList) -> Self {
        self.direction = Some(v);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_tolerances(mut self, t: Tolerances) -> Self {
        self.tolerances = t;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub claim_id: ClaimId,
    pub domain: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cert: Option<CertificateSummary>,
    pub slack: f64,
    pub rows: Vec<ReportRow>,
    pub notes: Vec<String>,
    /// Set when the claim could not be evaluated at all.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub pass: bool,
}

impl InequalityReport {
    pub fn new(claim_id: ClaimId, domain: impl Into<String>, slack: f64) -> Self {
        InequalityReport {
            claim_id,
            domain: domain.into(),
            cert: None,
            slack,
            rows: Vec::new(),
            notes: Vec::new(),
            error: None,
            pass: false,
        }
    }

    pub fn failed(claim_id: ClaimId, domain: impl Into<String>, slack: f64, error: String) -> Self {
        InequalityReport {
            error: Some(error),
            ..Self::new(claim_id, domain, slack)
        }
    }

    /// Recomputes `pass`: no error, at least one evaluated row, every evaluated row
    /// passing. Skipped rows neither pass nor fail.
    pub fn finish(mut self) -> Self {
        let evaluated: Vec<&ReportRow> = self.rows.iter().filter(|r| r.skipped.is_none()).collect();
        self.pass = self.error.is_none() && !evaluated.is_empty() && evaluated.iter().all(|r| r.pass);
        let skipped = self.rows.len() - evaluated.len();
        if skipped > 0 {
            self.notes.push(format!("{skipped} rows skipped"));
        }
        self
    }

    pub fn failing_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.skipped.is_none() && !r.pass).count()
    }

    pub fn min_margin(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.skipped.is_none())
            .map(|r| r.margin)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn all_pass(reports: &[InequalityReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

pub fn to_json(reports: &[InequalityReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Aligned plain-text table, one block per report.
pub fn to_text(reports: &[InequalityReport]) -> String {
    let mut out = String::new();
    for rep in reports {
        out.push_str(&format!(
            "{} [{}] {} slack={}\n",
            rep.claim_id,
            rep.domain,
            if rep.pass { "PASS" } else { "FAIL" },
            rep.slack
        ));
        if let Some(c) = &rep.cert {
            out.push_str(&format!(
                "  cert a={} b={} map={:?}\n",
                fmt_num(c.a),
                fmt_num(c.b),
                c.map_kind
            ));
        }
        if let Some(e) = &rep.error {
            out.push_str(&format!("  error: {e}\n"));
        }
        for n in &rep.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        let width = rep.rows.iter().map(|r| r.label.len()).max().unwrap_or(0);
        for r in &rep.rows {
            let status = match (&r.skipped, r.pass) {
                (Some(_), _) => "skip",
                (None, true) => "ok",
                (None, false) => "FAIL",
            };
            out.push_str(&format!(
                "  {:<width$}  {:>24}  {:>24}  {:>24}  {}",
                r.label,
                fmt_num(r.lhs),
                fmt_num(r.rhs),
                fmt_num(r.margin),
                status,
            ));
            if let Some(s) = &r.skipped {
                out.push_str(&format!("  ({s})"));
            }
            if let Some(n) = &r.note {
                out.push_str(&format!("  [{n}]"));
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> ComplexList {
        ComplexList(vec![[0.0, 0.0]])
    }

    #[test]
    fn margins_and_slack() {
        let r = ReportRow::check("x", p(), 1.04, 1.0, 0.05);
        assert!(r.pass && (r.margin + 0.04).abs() < 1e-12);
        assert!(!ReportRow::check("x", p(), 1.06, 1.0, 0.05).pass);
        assert!(ReportRow::check("x", p(), 0.0, 0.0, 0.05).pass);
        assert!(!ReportRow::strict("x", p(), 1.0, 1.0).pass);
        assert!(ReportRow::check("x", p(), -1.0, 0.0, 0.0).pass);
    }

    #[test]
    fn finish_ignores_skipped_rows() {
        let mut rep = InequalityReport::new(ClaimId::THM2A_CK, "disc", 0.05);
        rep.rows.push(ReportRow::check("a", p(), 0.5, 1.0, 0.05));
        rep.rows.push(ReportRow::skipped("b", p(), "no leg"));
        let rep = rep.finish();
        assert!(rep.pass);
        assert_eq!(rep.notes, vec!["1 rows skipped".to_string()]);
        assert!(!InequalityReport::new(ClaimId::LEM5_PSH, "disc", 0.05).finish().pass);
    }

    #[test]
    fn json_and_text() {
        let mut rep = InequalityReport::new(ClaimId::LEM1_KERNEL, "disc", 0.05);
        rep.rows.push(ReportRow::check("K >= lower", p(), 0.25, 0.5, 0.05));
        let reps = vec![rep.finish()];
        let json = to_json(&reps);
        assert!(json.contains("\"claim_id\": \"LEM1_KERNEL\""));
        assert!(json.contains("\"margin\": 0.5"));
        let text = to_text(&reps);
        assert!(text.starts_with("LEM1_KERNEL [disc] PASS"));
        assert!(text.contains("5.0000000000000000e-1"));
    }
}
