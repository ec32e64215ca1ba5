//! Diagnostic reports as CSV rows.

use super::SlopeFit;
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowVerdict {
    Pass,
    Fail,
    Inconclusive,
    /// Reported without a pass/fail claim.
    Qualitative,
}

impl RowVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowVerdict::Pass => "pass",
            RowVerdict::Fail => "fail",
            RowVerdict::Inconclusive => "inconclusive",
            RowVerdict::Qualitative => "qualitative",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRow {
    pub functional: String,
    /// `key=value` pairs joined by `;`.
    pub parameters: String,
    pub fitted: f64,
    pub expected: f64,
    pub r_squared: f64,
    pub verdict: RowVerdict,
}

impl DiagnosticRow {
    /// Row for a slope fit judged against `expected` with relative tolerance `rel_tol`.
    pub fn from_fit(functional: &str, parameters: &str, fit: &SlopeFit, expected: f64, rel_tol: f64) -> Self {
        let verdict = if !fit.is_conclusive() {
            RowVerdict::Inconclusive
        } else if fit.matches(expected, rel_tol) {
            RowVerdict::Pass
        } else {
            RowVerdict::Fail
        };
        Self {
            functional: functional.into(),
            parameters: parameters.into(),
            fitted: fit.exponent,
            expected,
            r_squared: fit.r_squared,
            verdict,
        }
    }
}

pub const REPORT_HEADER: &str = "functional,parameters,fitted,expected,r_squared,verdict";

/// CSV text with a fixed header; floats use shortest round-trip formatting.
pub fn report_csv(rows: &[DiagnosticRow]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.functional,
            r.parameters,
            r.fitted,
            r.expected,
            r.r_squared,
            r.verdict.as_str()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_follow_the_fit_verdict() {
        let fit = SlopeFit { exponent: -0.49, prefactor: 1.0, r_squared: 0.99, t_range: (0.1, 1.0), samples: 8 };
        let row = DiagnosticRow::from_fit("smoothing", "gamma=1", &fit, -0.5, 0.1);
        assert_eq!(row.verdict, RowVerdict::Pass);
        let bad = SlopeFit { r_squared: 0.5, ..fit };
        assert_eq!(DiagnosticRow::from_fit("smoothing", "gamma=1", &bad, -0.5, 0.1).verdict, RowVerdict::Inconclusive);
        let text = report_csv(&[row]);
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap(), "smoothing,gamma=1,-0.49,-0.5,0.99,pass");
    }
}
