use std::fmt::Write;

use super::estimate::replica_norms;
use super::{ExperimentConfig, LabError};

/// Exceedances needed at a threshold before its frequency is trusted.
pub const MIN_EXCEEDANCES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailRow {
    pub x: f64,
    pub exceedances: usize,
    /// Fraction of replicas with `|S_n|_{p⃗}^{p̄} > x`.
    pub empirical_tail: f64,
    pub bound_curve: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailProbe {
    pub n: usize,
    pub rows: Vec<TailRow>,
    /// `c` making the bound curve pass through the empirical tail at the
    /// smallest threshold.
    pub fitted_c: f64,
    /// The empirical tail stays at or below the curve at every larger
    /// threshold with at least [`MIN_EXCEEDANCES`] exceedances.
    pub dominated: bool,
}

impl TailProbe {
    pub const CSV_HEADER: &'static str = "experiment_id,n,x,exceedances,empirical_tail,bound_curve";

    pub fn to_csv(&self, experiment_id: &str) -> String {
        format!("{}\n{}", Self::CSV_HEADER, self.csv_rows(experiment_id))
    }

    /// Body rows without the header.
    pub fn csv_rows(&self, experiment_id: &str) -> String {
        let mut out = String::new();
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{},{}", experiment_id, self.n, r.x, r.exceedances, r.empirical_tail, r.bound_curve)
                .unwrap();
        }
        out
    }
}

/// Empirical tail of `|S_n|_{p⃗}^{p̄}` at the configured thresholds against
/// `exp(-c · shape(x))`, with `c` fitted at the smallest threshold.
///
/// If nothing exceeds the smallest threshold the tail is identically zero on
/// the grid of thresholds; the curve is then reported as zero and the probe
/// is trivially dominated.
pub fn tail_probe(cfg: &ExperimentConfig, n: usize) -> Result<TailProbe, LabError> {
    cfg.validate()?;
    let spec = cfg.tail.as_ref().ok_or(LabError::TailSpecMissing)?;
    let pbar = cfg.p.pbar();
    let stats: Vec<f64> = replica_norms(cfg, n)?.into_iter().map(|v| v.powf(pbar)).collect();
    let r = stats.len() as f64;

    let counts: Vec<usize> = spec.thresholds.iter().map(|&x| stats.iter().filter(|&&t| t > x).count()).collect();
    let first = counts[0];
    if first > 0 && first < MIN_EXCEEDANCES {
        return Err(LabError::InsufficientReplicas { exceedances: first });
    }
    let fitted_c = if first == 0 {
        f64::INFINITY
    } else {
        -(first as f64 / r).ln() / spec.shape(spec.thresholds[0])
    };
    let curve = |x: f64| if fitted_c.is_infinite() { 0.0 } else { (-fitted_c * spec.shape(x)).exp() };

    let rows: Vec<TailRow> = spec
        .thresholds
        .iter()
        .zip(&counts)
        .map(|(&x, &k)| TailRow { x, exceedances: k, empirical_tail: k as f64 / r, bound_curve: curve(x) })
        .collect();
    let dominated = rows[1..]
        .iter()
        .filter(|row| row.exceedances >= MIN_EXCEEDANCES)
        .all(|row| row.empirical_tail <= row.bound_curve);
    Ok(TailProbe { n, rows, fitted_c, dominated })
}
