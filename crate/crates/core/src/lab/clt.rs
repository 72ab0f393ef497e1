use rayon::prelude::*;

use super::estimate::replica_norms;
use super::{ks_critical, ks_two_sample, ExperimentConfig, LabError, KS_C_ONE_PERCENT};
use crate::grid::mixed_norm;
use crate::models::{long_run_covariance, GaussianSampler};
use crate::Field;

/// Distance between the laws of `|S_n|_{p⃗}` and `|S_∞|_{p⃗}` at one `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub ks_distance: f64,
    /// Two-sample 1% critical value for the sample sizes used.
    pub ks_critical: f64,
}

/// Keys the Gaussian limit draws away from the replica streams of `S_n`.
const LIMIT_TAG: u64 = 1 << 63;

/// For each `n`, the KS distance between `R` draws of `|S_n|_{p⃗}` and `R`
/// draws of `|S_∞|_{p⃗}`, with `S_∞ ~ N(0, R_∞)` simulated from the analytic
/// long-run covariance.
pub fn clt_convergence_test(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRow>, LabError> {
    cfg.validate()?;
    let grid = cfg.model.grid().clone();
    let sampler = GaussianSampler::new(&long_run_covariance(&cfg.model)?, grid.clone())?;
    let critical = ks_critical(KS_C_ONE_PERCENT, cfg.replicas, cfg.replicas);
    let mut rows = Vec::with_capacity(cfg.n_schedule.len());
    for &n in &cfg.n_schedule {
        let sums = replica_norms(cfg, n)?;
        let key = cfg.seed.derive(LIMIT_TAG | n as u64);
        let limit = (0..cfg.replicas)
            .into_par_iter()
            .map(|i| {
                let f = Field::from_flat_unchecked(grid.clone(), sampler.sample_flat(key.with_stream(i as u64)));
                mixed_norm(&f, &cfg.p)
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(ConvergenceRow { n, ks_distance: ks_two_sample(&sums, &limit)?, ks_critical: critical });
    }
    Ok(rows)
}
