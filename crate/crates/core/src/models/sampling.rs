use std::collections::VecDeque;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{CovarianceMatrix, ModelError, RandomFieldModel, SeedSpec, TemporalMode};
use crate::{Field, Grid};

/// Lazily generated sequence `ξ_1, ξ_2, …` of one model on one stream, as
/// flat row-major cell vectors.
pub struct SequenceStream<'a> {
    model: &'a RandomFieldModel,
    rng: ChaCha8Rng,
    state: StreamState,
}

enum StreamState {
    Iid,
    /// Last `m0` innovations, oldest first.
    MovingAverage(VecDeque<Vec<f64>>),
    Martingale { prev: Vec<f64>, scale: Vec<f64> },
}

impl<'a> SequenceStream<'a> {
    pub fn new(model: &'a RandomFieldModel, seed: SeedSpec) -> Self {
        let mut rng = seed.rng();
        let state = match model.temporal() {
            TemporalMode::Iid => StreamState::Iid,
            TemporalMode::MDependent(spec) => {
                let window = (0..spec.lag()).map(|_| innovation(model, &mut rng)).collect();
                StreamState::MovingAverage(window)
            }
            TemporalMode::MartingaleDifference(_) => StreamState::Martingale {
                prev: vec![0.0; model.grid().cell_count()],
                scale: model.innovation_scale(),
            },
        };
        let mut stream = Self { model, rng, state };
        if let TemporalMode::MartingaleDifference(spec) = model.temporal() {
            for _ in 0..spec.burn_in {
                stream.next_flat();
            }
        }
        stream
    }

    pub fn next_flat(&mut self) -> Vec<f64> {
        let model = self.model;
        let fresh = innovation(model, &mut self.rng);
        match (&mut self.state, model.temporal()) {
            (StreamState::Iid, _) => fresh,
            (StreamState::MovingAverage(window), TemporalMode::MDependent(spec)) => {
                let m0 = spec.lag();
                // ξ_k = a_0 η_k + a_1 η_{k-1} + … + a_{m0} η_{k-m0}
                let mut out: Vec<f64> = fresh.iter().map(|v| spec.coefficients[0] * v).collect();
                for (j, past) in window.iter().rev().enumerate() {
                    let a = spec.coefficients[j + 1];
                    for (o, v) in out.iter_mut().zip(past) {
                        *o += a * v;
                    }
                }
                if m0 > 0 {
                    window.pop_front();
                    window.push_back(fresh);
                }
                out
            }
            (StreamState::Martingale { prev, scale }, TemporalMode::MartingaleDifference(spec)) => {
                let sign = if self.rng.random::<bool>() { 1.0 } else { -1.0 };
                let out: Vec<f64> = fresh
                    .iter()
                    .zip(prev.iter())
                    .zip(scale.iter())
                    .map(|((&eta, &last), &s)| {
                        let ratio2 = if s > 0.0 { (last / s).powi(2) } else { 0.0 };
                        let h = (1.0 - spec.feedback + spec.feedback * ratio2.min(spec.cap)).sqrt();
                        sign * h * eta
                    })
                    .collect();
                prev.clone_from(&out);
                out
            }
            _ => unreachable!("stream state matches the model's temporal mode"),
        }
    }

    pub fn next_field(&mut self) -> Field {
        Field::from_flat_unchecked(self.model.grid().clone(), self.next_flat())
    }
}

/// One innovation `η = σ ⊙ (L z)` (or `σ ⊙ z` for white noise).
fn innovation(model: &RandomFieldModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let driver = model.driver();
    let sigma = model.envelope().values();
    match &model.factor {
        None => sigma.iter().map(|s| s * driver.sample(rng)).collect(),
        Some(l) => {
            let z: Vec<f64> = (0..l.ncols()).map(|_| driver.sample(rng)).collect();
            sigma
                .iter()
                .enumerate()
                .map(|(i, s)| s * l.row(i).iter().zip(&z).map(|(a, b)| a * b).sum::<f64>())
                .collect()
        }
    }
}

/// One draw of `ξ` from its stationary marginal (the first term of the
/// sequence on this stream).
pub fn sample_field(model: &RandomFieldModel, seed: SeedSpec) -> Field {
    SequenceStream::new(model, seed).next_field()
}

pub fn sample_sequence(model: &RandomFieldModel, n: usize, seed: SeedSpec) -> Result<Vec<Field>, ModelError> {
    if n == 0 {
        return Err(ModelError::InvalidLength);
    }
    let mut stream = SequenceStream::new(model, seed);
    Ok((0..n).map(|_| stream.next_field()).collect())
}

/// Sampler for `N(0, R)` on a grid, factoring `R` once.
#[derive(Clone, Debug)]
pub struct GaussianSampler {
    grid: Arc<Grid>,
    factor: DMatrix<f64>,
}

impl GaussianSampler {
    pub fn new(covariance: &CovarianceMatrix, grid: Arc<Grid>) -> Result<Self, ModelError> {
        if covariance.dim() != grid.cell_count() {
            return Err(ModelError::InvalidModel {
                field: "covariance".into(),
                reason: format!("matrix is {0}x{0}, grid has {1} cells", covariance.dim(), grid.cell_count()),
            });
        }
        Ok(Self { factor: covariance.factor()?, grid })
    }

    pub fn sample_flat(&self, seed: SeedSpec) -> Vec<f64> {
        let mut rng = seed.rng();
        let z = DVector::from_fn(self.factor.ncols(), |_, _| StandardNormal.sample(&mut rng));
        (&self.factor * z).iter().copied().collect()
    }

    pub fn sample(&self, seed: SeedSpec) -> Field {
        Field::from_flat_unchecked(self.grid.clone(), self.sample_flat(seed))
    }
}

pub fn sample_gaussian_limit(r: &CovarianceMatrix, grid: Arc<Grid>, seed: SeedSpec) -> Result<Field, ModelError> {
    Ok(GaussianSampler::new(r, grid)?.sample(seed))
}
