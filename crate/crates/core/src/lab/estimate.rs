use rayon::prelude::*;

use super::sum::{accumulate, normalize};
use super::{ExperimentConfig, LabError};
use crate::grid::{check_permutation_inequality, mixed_norm, PermutationCheck};
use crate::models::{SeedSpec, SequenceStream};
use crate::{Ensemble, Field};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Monte Carlo estimate of `(E X^q)^{1/q}` for a nonnegative statistic `X`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEstimate {
    pub value: f64,
    /// Delta-method standard error of `value`.
    pub std_error: f64,
    /// `value + Z_95 · std_error`.
    pub ci_upper95: f64,
    pub replicas: usize,
}

impl MomentEstimate {
    /// From per-replica statistics `x_i >= 0` and the moment order `q`.
    pub fn from_samples(samples: &[f64], q: f64) -> Self {
        let r = samples.len();
        let powers: Vec<f64> = samples.iter().map(|x| if *x == 0.0 { 0.0 } else { x.powf(q) }).collect();
        let mean = powers.iter().sum::<f64>() / r as f64;
        let var = if r > 1 {
            powers.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1) as f64
        } else {
            0.0
        };
        let se_mean = (var / r as f64).sqrt();
        let (value, std_error) = if mean > 0.0 {
            let value = mean.powf(1.0 / q);
            // d/dM M^{1/q} = M^{1/q - 1} / q
            (value, value / (q * mean) * se_mean)
        } else {
            (0.0, 0.0)
        };
        Self { value, std_error, ci_upper95: value + Z_95 * std_error, replicas: r }
    }
}

/// Stream key for replica `i` at sample size `n`.
pub(crate) fn replica_seed(seed: SeedSpec, n: usize, i: usize) -> SeedSpec {
    seed.derive(n as u64).with_stream(i as u64)
}

/// Flat `S_n` of replica `i`.
pub(crate) fn replica_sum(cfg: &ExperimentConfig, n: usize, i: usize) -> Vec<f64> {
    let mut stream = SequenceStream::new(&cfg.model, replica_seed(cfg.seed, n, i));
    let mut acc = vec![0.0; cfg.model.grid().cell_count()];
    for _ in 0..n {
        accumulate(&mut acc, &stream.next_flat());
    }
    normalize(&mut acc, n);
    acc
}

/// Applies `stat` to the `S_n` of every replica, in replica order.
pub(crate) fn replica_statistics<F>(cfg: &ExperimentConfig, n: usize, stat: F) -> Result<Vec<f64>, LabError>
where
    F: Fn(Vec<f64>) -> Result<f64, LabError> + Sync,
{
    (0..cfg.replicas).into_par_iter().map(|i| stat(replica_sum(cfg, n, i))).collect()
}

/// `|S_n|_{p⃗}` for every replica.
pub(crate) fn replica_norms(cfg: &ExperimentConfig, n: usize) -> Result<Vec<f64>, LabError> {
    let grid = cfg.model.grid().clone();
    replica_statistics(cfg, n, |flat| Ok(mixed_norm(&Field::from_flat_unchecked(grid.clone(), flat), &cfg.p)?))
}

/// `(E|S_n|_{p⃗}^{m p̄})^{1/(m p̄)}` over the configured replicas.
pub fn estimate_norm_moment(cfg: &ExperimentConfig, n: usize) -> Result<MomentEstimate, LabError> {
    cfg.validate()?;
    if n == 0 {
        return Err(LabError::InvalidConfig { field: "n", reason: "sample size must be positive".into() });
    }
    let norms = replica_norms(cfg, n)?;
    Ok(MomentEstimate::from_samples(&norms, cfg.moment_order()))
}

/// The replica fields `S_n^{(1)}, …, S_n^{(R)}`.
pub fn normed_sum_samples(cfg: &ExperimentConfig, n: usize) -> Result<Vec<Field>, LabError> {
    cfg.validate()?;
    let grid = cfg.model.grid().clone();
    Ok((0..cfg.replicas)
        .into_par_iter()
        .map(|i| Field::from_flat_unchecked(grid.clone(), replica_sum(cfg, n, i)))
        .collect())
}

/// Permutation inequality on the simulated ensemble of `S_n` with
/// `r = m · p̄`: the `r`-th replica moment of `|S_n|_{p⃗}` against the
/// mixed norm of the replica-wise moment field. Both sides are exact on the
/// discrete ensemble.
pub fn empirical_permutation_check(cfg: &ExperimentConfig, n: usize) -> Result<PermutationCheck<f64>, LabError> {
    let ensemble = Ensemble::new(normed_sum_samples(cfg, n)?)?;
    Ok(check_permutation_inequality(&ensemble, &cfg.p, cfg.moment_order())?)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    #[test]
    fn estimate_of_constant_statistic() {
        let e = MomentEstimate::from_samples(&[2.0; 10], 3.0);
        assert_relative_eq!(e.value, 2.0, max_relative = 1e-15);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.ci_upper95, e.value);
    }

    #[test]
    fn estimate_of_zero_statistic() {
        let e = MomentEstimate::from_samples(&[0.0; 10], 4.0);
        assert_eq!((e.value, e.std_error, e.ci_upper95), (0.0, 0.0, 0.0));
    }

    #[test]
    fn delta_method_matches_hand_computation() {
        // x = (1, 3), q = 2: powers (1, 9), mean 5, var 32, se_mean 4
        let e = MomentEstimate::from_samples(&[1.0, 3.0], 2.0);
        assert_relative_eq!(e.value, 5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(e.std_error, 4.0 / (2.0 * 5f64.sqrt()), max_relative = 1e-15);
        assert!(e.ci_upper95 >= e.value);
    }
}
