use std::fmt::Write;

use super::{ConstantKind, ConvergenceRow, MomentEstimate};

pub const REPORT_HEADER: &str = "experiment_id,theorem,n,lhs,stderr,ci_upper,rhs,holds,margin_ratio";
pub const CONVERGENCE_HEADER: &str = "experiment_id,n,ks_distance,ks_critical";

/// One sample size of a moment-bound check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub lhs: MomentEstimate,
    pub rhs: f64,
    /// `lhs.ci_upper95 <= rhs`.
    pub holds: bool,
    /// `lhs.value / rhs`.
    pub margin_ratio: f64,
}

impl ReportRow {
    pub fn new(n: usize, lhs: MomentEstimate, rhs: f64) -> Self {
        let margin_ratio = if rhs > 0.0 {
            lhs.value / rhs
        } else if lhs.value == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Self { n, lhs, rhs, holds: lhs.ci_upper95 <= rhs, margin_ratio }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub theorem: String,
    pub constant_kind: ConstantKind,
    pub rows: Vec<ReportRow>,
}

impl VerificationReport {
    /// Rows comparing each estimate against the single bound `rhs`.
    pub fn from_estimates(
        theorem: impl Into<String>,
        constant_kind: ConstantKind,
        estimates: &[(usize, MomentEstimate)],
        rhs: f64,
    ) -> Self {
        let rows = estimates.iter().map(|&(n, e)| ReportRow::new(n, e, rhs)).collect();
        Self { theorem: theorem.into(), constant_kind, rows }
    }

    /// The supremum over the sampled `n` stays below the bound.
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }

    /// Ratio of the largest to the smallest estimate across `n`.
    pub fn lhs_spread(&self) -> f64 {
        let values = self.rows.iter().map(|r| r.lhs.value);
        let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
        let min = values.fold(f64::INFINITY, f64::min);
        if max == 0.0 {
            1.0
        } else {
            max / min
        }
    }

    /// Body rows without the header.
    pub fn csv_rows(&self, experiment_id: &str) -> String {
        let mut out = String::new();
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                experiment_id, self.theorem, r.n, r.lhs.value, r.lhs.std_error, r.lhs.ci_upper95, r.rhs, r.holds, r.margin_ratio
            )
            .unwrap();
        }
        out
    }

    pub fn to_csv(&self, experiment_id: &str) -> String {
        format!("{REPORT_HEADER}\n{}", self.csv_rows(experiment_id))
    }
}

pub fn convergence_csv(experiment_id: &str, rows: &[ConvergenceRow]) -> String {
    let mut out = format!("{CONVERGENCE_HEADER}\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", experiment_id, r.n, r.ks_distance, r.ks_critical).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(value: f64, se: f64) -> MomentEstimate {
        MomentEstimate { value, std_error: se, ci_upper95: value + super::super::Z_95 * se, replicas: 100 }
    }

    #[test]
    fn verdict_uses_the_upper_confidence_limit() {
        // point estimate below the bound, upper limit above it
        let row = ReportRow::new(4, est(1.0, 0.1), 1.1);
        assert!(!row.holds);
        let row = ReportRow::new(4, est(1.0, 0.01), 1.1);
        assert!(row.holds);
    }

    #[test]
    fn fake_small_bound_fails() {
        let r = VerificationReport::from_estimates("moment_bound", ConstantKind::Rosenthal, &[(1, est(2.2, 0.01)), (2, est(2.2, 0.01))], 0.1);
        assert!(r.rows.iter().all(|r| !r.holds));
        assert!(!r.all_hold());
    }

    #[test]
    fn zero_bound_zero_lhs_holds() {
        let row = ReportRow::new(1, est(0.0, 0.0), 0.0);
        assert!(row.holds);
        assert_eq!(row.margin_ratio, 0.0);
    }

    #[test]
    fn csv_layout() {
        let r = VerificationReport::from_estimates("moment_bound", ConstantKind::Rosenthal, &[(4, est(1.5, 0.0))], 3.0);
        assert_eq!(r.to_csv("e1"), format!("{REPORT_HEADER}\ne1,moment_bound,4,1.5,0,1.5,3,true,0.5\n"));
    }
}
