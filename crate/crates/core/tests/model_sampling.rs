use std::sync::Arc;

use mixnorm::grid::{Axis, ProductGrid};
use mixnorm::models::{
    covariance_of, long_run_covariance, pointwise_abs_moment, sample_field, sample_gaussian_limit, sample_sequence,
    CovarianceMatrix, Driver, MartingaleSpec, ModelError, MovingAverageSpec, RandomFieldModel, SeedSpec,
    SpatialMode, TemporalMode,
};
use mixnorm::{Field, Grid};

const DRAWS: u64 = 100_000;

fn grid(n: usize) -> Arc<Grid> {
    ProductGrid::shared(vec![Axis::counting("x", n).unwrap()]).unwrap()
}

fn envelope(values: &[f64]) -> Field {
    Field::from_flat(grid(values.len()), values.to_vec()).unwrap()
}

fn draws(model: &RandomFieldModel, seed: u64) -> Vec<Vec<f64>> {
    let base = SeedSpec::new(seed, 0);
    (0..DRAWS).map(|i| sample_field(model, base.with_stream(i)).to_flat()).collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

#[test]
fn white_noise_marginals_match_closed_forms() {
    for (k, driver) in [
        Driver::Gaussian,
        Driver::Rademacher,
        Driver::CenteredExponential,
        Driver::SymmetricWeibull { shape: 2.0 },
    ]
    .into_iter()
    .enumerate()
    {
        let model = RandomFieldModel::white_noise(envelope(&[1.0, 2.0]), driver).unwrap();
        let xs = draws(&model, 10 + k as u64);
        let cov = covariance_of(&model).unwrap();
        for c in 0..2 {
            let m = mean(xs.iter().map(|v| v[c]));
            let var = mean(xs.iter().map(|v| v[c] * v[c]));
            let sd = cov.get(c, c).sqrt();
            assert!(m.abs() < 4.0 * sd / (DRAWS as f64).sqrt(), "{driver:?} mean {m}");
            assert!((var / cov.get(c, c) - 1.0).abs() < 0.03, "{driver:?} var {var}");
        }
        let cross = mean(xs.iter().map(|v| v[0] * v[1]));
        assert!(cross.abs() < 0.05, "{driver:?} cross {cross}");
        for q in [2.0, 3.0, 4.0, 6.0] {
            let exact = pointwise_abs_moment(&model, q).unwrap().to_flat();
            let emp = mean(xs.iter().map(|v| v[1].abs().powf(q))).powf(1.0 / q);
            // high moments of heavy drivers converge slowly
            let tol = if q >= 6.0 { 0.08 } else { 0.03 };
            assert!((emp / exact[1] - 1.0).abs() < tol, "{driver:?} q={q}: {emp} vs {}", exact[1]);
        }
    }
}

#[test]
fn correlated_gaussian_covariance() {
    let c = CovarianceMatrix::from_rows(&[vec![1.0, 0.6, 0.2], vec![0.6, 1.0, 0.5], vec![0.2, 0.5, 1.0]]).unwrap();
    let model = RandomFieldModel::new(
        envelope(&[1.0, 0.5, 2.0]),
        Driver::Gaussian,
        SpatialMode::Correlated(c),
        TemporalMode::Iid,
    )
    .unwrap();
    let xs = draws(&model, 20);
    let cov = covariance_of(&model).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let emp = mean(xs.iter().map(|v| v[i] * v[j]));
            let scale = (cov.get(i, i) * cov.get(j, j)).sqrt();
            assert!((emp - cov.get(i, j)).abs() < 0.02 * scale, "({i},{j}) {emp} vs {}", cov.get(i, j));
        }
    }
}

#[test]
fn rank_deficient_correlation_samples_collinear_fields() {
    let c = CovarianceMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let model =
        RandomFieldModel::new(envelope(&[1.0, 1.0]), Driver::Rademacher, SpatialMode::Correlated(c), TemporalMode::Iid)
            .unwrap();
    for i in 0..100 {
        let v = sample_field(&model, SeedSpec::new(3, i)).to_flat();
        assert!((v[0] - v[1]).abs() < 1e-8);
    }
}

#[test]
fn indefinite_correlation_is_rejected() {
    let err = CovarianceMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap_err();
    assert!(matches!(err, ModelError::NotPositiveSemidefinite { .. }), "{err:?}");
}

#[test]
fn martingale_increments_are_uncorrelated_with_the_past() {
    let model = RandomFieldModel::white_noise(envelope(&[1.0, 1.0]), Driver::Gaussian)
        .unwrap()
        .with_temporal(TemporalMode::MartingaleDifference(MartingaleSpec { feedback: 0.5, cap: 4.0, burn_in: 8 }))
        .unwrap();
    let base = SeedSpec::new(30, 0);
    let mut acc = 0.0;
    let mut sq = 0.0;
    for i in 0..DRAWS {
        let seq = sample_sequence(&model, 2, base.with_stream(i)).unwrap();
        let (a, b) = (seq[0].to_flat(), seq[1].to_flat());
        acc += b[0] * a[0].signum();
        sq += b[0] * b[0];
    }
    let m = acc / DRAWS as f64;
    let sd = (sq / DRAWS as f64).sqrt();
    assert!(m.abs() < 4.0 * sd / (DRAWS as f64).sqrt(), "E[xi_2 sign(xi_1)] = {m}");
    assert!(matches!(covariance_of(&model), Err(ModelError::NoClosedForm { .. })));
}

#[test]
fn moving_average_is_stationary() {
    let a = vec![1.0, 0.5, 0.25];
    let model = RandomFieldModel::white_noise(envelope(&[1.0]), Driver::Rademacher)
        .unwrap()
        .with_temporal(TemporalMode::MDependent(MovingAverageSpec { coefficients: a.clone(), beta_cap: 1.0 }))
        .unwrap();
    let base = SeedSpec::new(40, 0);
    let n = 6;
    let mut second = vec![0.0; n];
    let mut lag1 = 0.0;
    for i in 0..20_000u64 {
        let seq = sample_sequence(&model, n, base.with_stream(i)).unwrap();
        let v: Vec<f64> = seq.iter().map(|f| f.to_flat()[0]).collect();
        for (s, x) in second.iter_mut().zip(&v) {
            *s += x * x;
        }
        lag1 += v[3] * v[4];
    }
    let var: f64 = a.iter().map(|x| x * x).sum();
    for s in &second {
        assert!((s / 20_000.0 / var - 1.0).abs() < 0.03, "{s}");
    }
    // a0 a1 + a1 a2
    assert!((lag1 / 20_000.0 - 0.625).abs() < 0.03, "{lag1}");
    assert!((long_run_covariance(&model).unwrap().get(0, 0) - 1.75f64.powi(2)).abs() < 1e-12);
}

#[test]
fn gaussian_limit_has_requested_covariance() {
    let r = CovarianceMatrix::from_rows(&[vec![2.0, -0.7], vec![-0.7, 0.5]]).unwrap();
    let base = SeedSpec::new(50, 0);
    let xs: Vec<Vec<f64>> =
        (0..DRAWS).map(|i| sample_gaussian_limit(&r, grid(2), base.with_stream(i)).unwrap().to_flat()).collect();
    for i in 0..2 {
        for j in 0..2 {
            let emp = mean(xs.iter().map(|v| v[i] * v[j]));
            assert!((emp - r.get(i, j)).abs() < 0.02, "({i},{j}) {emp}");
        }
    }
}

#[test]
fn same_seed_same_draws() {
    let model = RandomFieldModel::white_noise(envelope(&[1.0, 2.0, 3.0]), Driver::CenteredExponential).unwrap();
    let s = SeedSpec::new(7, 3);
    assert_eq!(sample_sequence(&model, 5, s).unwrap(), sample_sequence(&model, 5, s).unwrap());
    assert_ne!(sample_field(&model, s).to_flat(), sample_field(&model, s.with_stream(4)).to_flat());
}
