use std::sync::Arc;

use nalgebra::DMatrix;

use super::{CovarianceMatrix, Driver, ModelError};
use crate::constants::MixingSchedule;
use crate::{Field, Grid};

/// Cross-cell structure of one innovation `η`.
#[derive(Clone, Debug, PartialEq)]
pub enum SpatialMode {
    /// Independent cells: `η(x) = σ(x) D_x`.
    WhiteNoise,
    /// `η = σ ⊙ (L z)` with `L Lᵀ = C` and `z` i.i.d. driver draws.
    Correlated(CovarianceMatrix),
}

/// Parameters of the volatility-feedback martingale difference sequence
/// `ξ_k = ε_k · h_k ⊙ η_k`, where `ε_k = ±1` and `η_k` are fresh and
/// `h_k(x) = sqrt(1 - feedback + feedback · min(ξ_{k-1}(x)² / s(x)², cap))`
/// with `s(x)` the standard deviation of `η(x)` and `ξ_0 = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MartingaleSpec {
    pub feedback: f64,
    pub cap: f64,
    /// Steps discarded before the first emitted term.
    pub burn_in: usize,
}

impl MartingaleSpec {
    /// Largest value `h_k` can take.
    pub fn h_max(&self) -> f64 {
        (1.0 - self.feedback + self.feedback * self.cap).sqrt()
    }
}

/// `ξ_k = Σ_{j=0}^{m0} a_j η_{k-j}` over an i.i.d. innovation sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct MovingAverageSpec {
    pub coefficients: Vec<f64>,
    /// Certified upper bound on `β(k)` for `1 <= k <= m0`.
    pub beta_cap: f64,
}

impl MovingAverageSpec {
    pub fn lag(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TemporalMode {
    Iid,
    MartingaleDifference(MartingaleSpec),
    MDependent(MovingAverageSpec),
}

/// Generative description of `ξ(x⃗, ω)` and of the sequence `{ξ_k}`.
#[derive(Clone, Debug)]
pub struct RandomFieldModel {
    grid: Arc<Grid>,
    envelope: Field,
    driver: Driver,
    spatial: SpatialMode,
    temporal: TemporalMode,
    /// Square root of the spatial correlation, when correlated.
    pub(crate) factor: Option<DMatrix<f64>>,
}

fn invalid(field: &str, reason: impl Into<String>) -> ModelError {
    ModelError::InvalidModel { field: field.into(), reason: reason.into() }
}

impl RandomFieldModel {
    pub fn new(
        envelope: Field,
        driver: Driver,
        spatial: SpatialMode,
        temporal: TemporalMode,
    ) -> Result<Self, ModelError> {
        let grid = envelope.grid().clone();
        if let Some(i) = envelope.values().iter().position(|&s| s < 0.0) {
            return Err(invalid("model.envelope", format!("entry {i} is negative")));
        }
        driver.validate()?;
        let factor = match &spatial {
            SpatialMode::WhiteNoise => None,
            SpatialMode::Correlated(c) => {
                if c.dim() != grid.cell_count() {
                    return Err(invalid(
                        "model.spatial.correlated",
                        format!("matrix is {0}x{0}, grid has {1} cells", c.dim(), grid.cell_count()),
                    ));
                }
                Some(c.factor()?)
            }
        };
        match &temporal {
            TemporalMode::Iid => {}
            TemporalMode::MartingaleDifference(spec) => {
                if !(0.0..1.0).contains(&spec.feedback) {
                    return Err(invalid("model.temporal.feedback", "must lie in [0, 1)"));
                }
                if !(spec.cap > 0.0 && spec.cap.is_finite()) {
                    return Err(invalid("model.temporal.cap", "must be positive and finite"));
                }
            }
            TemporalMode::MDependent(spec) => {
                if spec.coefficients.is_empty() {
                    return Err(invalid("model.temporal.coefficients", "need at least a_0"));
                }
                if spec.coefficients.iter().any(|a| !a.is_finite()) {
                    return Err(invalid("model.temporal.coefficients", "non-finite coefficient"));
                }
                if !(spec.beta_cap >= 0.0 && spec.beta_cap.is_finite()) {
                    return Err(invalid("model.temporal.beta_cap", "must be finite and nonnegative"));
                }
            }
        }
        Ok(Self { grid, envelope, driver, spatial, temporal, factor })
    }

    /// I.i.d. white noise with envelope `σ`.
    pub fn white_noise(envelope: Field, driver: Driver) -> Result<Self, ModelError> {
        Self::new(envelope, driver, SpatialMode::WhiteNoise, TemporalMode::Iid)
    }

    pub fn with_temporal(self, temporal: TemporalMode) -> Result<Self, ModelError> {
        Self::new(self.envelope, self.driver, self.spatial, temporal)
    }

    /// Same model with envelope `c·σ`.
    pub fn with_envelope_scaled(&self, c: f64) -> Result<Self, ModelError> {
        Self::new(self.envelope.scaled(c), self.driver, self.spatial.clone(), self.temporal.clone())
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn envelope(&self) -> &Field {
        &self.envelope
    }

    pub fn driver(&self) -> Driver {
        self.driver
    }

    pub fn spatial(&self) -> &SpatialMode {
        &self.spatial
    }

    pub fn temporal(&self) -> &TemporalMode {
        &self.temporal
    }

    fn sigma(&self) -> Vec<f64> {
        self.envelope.to_flat()
    }

    /// Diagonal of the spatial correlation (all ones for white noise).
    fn correlation_diag(&self) -> Vec<f64> {
        match &self.spatial {
            SpatialMode::WhiteNoise => vec![1.0; self.grid.cell_count()],
            SpatialMode::Correlated(c) => (0..c.dim()).map(|i| c.get(i, i)).collect(),
        }
    }

    /// Standard deviation of each cell of one innovation.
    pub(crate) fn innovation_scale(&self) -> Vec<f64> {
        let v = self.driver.variance();
        self.sigma().iter().zip(self.correlation_diag()).map(|(s, c)| s * (v * c).sqrt()).collect()
    }

    /// `Var(η)`.
    fn innovation_covariance(&self) -> CovarianceMatrix {
        let s = self.sigma();
        let v = self.driver.variance();
        let n = s.len();
        let entries = match &self.spatial {
            SpatialMode::WhiteNoise => DMatrix::from_fn(n, n, |i, j| if i == j { s[i] * s[i] * v } else { 0.0 }),
            SpatialMode::Correlated(c) => DMatrix::from_fn(n, n, |i, j| s[i] * s[j] * c.get(i, j) * v),
        };
        CovarianceMatrix::from_trusted(entries)
    }

    /// Exact `(E|η(x)|^q)^{1/q}` when the innovation marginal has a closed form.
    fn innovation_moment(&self, q: f64) -> Option<Vec<f64>> {
        let s = self.sigma();
        let d = self.driver.abs_moment_root(q);
        match (&self.spatial, &self.factor) {
            (SpatialMode::WhiteNoise, _) => Some(s.iter().map(|si| si * d).collect()),
            (SpatialMode::Correlated(c), Some(l)) => {
                let mut out = Vec::with_capacity(s.len());
                for (i, si) in s.iter().enumerate() {
                    let row = l.row(i);
                    let nonzero = row.iter().filter(|v| **v != 0.0).count();
                    if self.driver.is_gaussian() || nonzero <= 1 {
                        out.push(si * c.get(i, i).sqrt() * d);
                    } else {
                        return None;
                    }
                }
                Some(out)
            }
            (SpatialMode::Correlated(_), None) => unreachable!("factor computed at construction"),
        }
    }

    /// Minkowski majorant of `(E|η(x)|^q)^{1/q}`: `σ(x) Σ_j |L_xj| ‖D‖_q`.
    fn innovation_moment_majorant(&self, q: f64) -> Vec<f64> {
        if let Some(exact) = self.innovation_moment(q) {
            return exact;
        }
        let s = self.sigma();
        let d = self.driver.abs_moment_root(q);
        let l = self.factor.as_ref().expect("non-closed-form innovations are correlated");
        s.iter().enumerate().map(|(i, si)| si * d * l.row(i).iter().map(|v| v.abs()).sum::<f64>()).collect()
    }

    fn field(&self, values: Vec<f64>) -> Field {
        Field::from_flat_unchecked(self.grid.clone(), values)
    }
}

fn check_order(q: f64) -> Result<(), ModelError> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(ModelError::InvalidMomentOrder { q });
    }
    Ok(())
}

/// `Var(ξ_k)` for the stationary marginal.
pub fn covariance_of(model: &RandomFieldModel) -> Result<CovarianceMatrix, ModelError> {
    let base = model.innovation_covariance();
    match model.temporal() {
        TemporalMode::Iid => Ok(base),
        TemporalMode::MDependent(spec) => {
            let s2: f64 = spec.coefficients.iter().map(|a| a * a).sum();
            Ok(CovarianceMatrix::from_trusted(base.entries() * s2))
        }
        TemporalMode::MartingaleDifference(_) => Err(ModelError::NoClosedForm { what: "martingale-difference covariance" }),
    }
}

/// Covariance of the Gaussian limit of `n^{-1/2} Σ ξ_k`.
pub fn long_run_covariance(model: &RandomFieldModel) -> Result<CovarianceMatrix, ModelError> {
    let base = model.innovation_covariance();
    match model.temporal() {
        TemporalMode::Iid => Ok(base),
        TemporalMode::MDependent(spec) => {
            let s: f64 = spec.coefficients.iter().sum();
            Ok(CovarianceMatrix::from_trusted(base.entries() * (s * s)))
        }
        TemporalMode::MartingaleDifference(_) => {
            Err(ModelError::NoClosedForm { what: "martingale-difference long-run covariance" })
        }
    }
}

/// `x ↦ (E|ξ(x)|^q)^{1/q}` for the stationary marginal of `ξ_k`.
pub fn pointwise_abs_moment(model: &RandomFieldModel, q: f64) -> Result<Field, ModelError> {
    check_order(q)?;
    let unsupported = || ModelError::UnsupportedMoment { driver: model.driver(), q };
    let base = model.innovation_moment(q).ok_or_else(unsupported)?;
    let factor = match model.temporal() {
        TemporalMode::Iid => 1.0,
        TemporalMode::MDependent(spec) => {
            let nonzero: Vec<f64> = spec.coefficients.iter().copied().filter(|a| *a != 0.0).collect();
            if nonzero.len() <= 1 {
                nonzero.first().map_or(0.0, |a| a.abs())
            } else if model.driver().is_gaussian() {
                nonzero.iter().map(|a| a * a).sum::<f64>().sqrt()
            } else {
                return Err(unsupported());
            }
        }
        TemporalMode::MartingaleDifference(_) => return Err(unsupported()),
    };
    Ok(model.field(base.into_iter().map(|v| v * factor).collect()))
}

/// Pointwise moment field usable on the right-hand side of a moment bound.
#[derive(Clone, Debug)]
pub struct MomentField {
    pub values: Field,
    /// `false` when `values` is a certified majorant rather than the exact moment.
    pub exact: bool,
}

/// The exact moment field when available, otherwise a Minkowski majorant.
pub fn moment_field_for_bound(model: &RandomFieldModel, q: f64) -> Result<MomentField, ModelError> {
    match pointwise_abs_moment(model, q) {
        Ok(values) => return Ok(MomentField { values, exact: true }),
        Err(ModelError::UnsupportedMoment { .. }) => {}
        Err(e) => return Err(e),
    }
    let base = model.innovation_moment_majorant(q);
    let factor = match model.temporal() {
        TemporalMode::Iid => 1.0,
        TemporalMode::MDependent(spec) => spec.coefficients.iter().map(|a| a.abs()).sum(),
        TemporalMode::MartingaleDifference(spec) => spec.h_max(),
    };
    Ok(MomentField { values: model.field(base.into_iter().map(|v| v * factor).collect()), exact: false })
}

/// `β(k) = beta_cap` inside the moving-average window, zero beyond it.
pub fn beta_schedule_of(model: &RandomFieldModel) -> Result<MixingSchedule, ModelError> {
    match model.temporal() {
        TemporalMode::MDependent(spec) => Ok(MixingSchedule::finite(vec![spec.beta_cap; spec.lag()])),
        _ => Err(ModelError::NoScheduleAvailable),
    }
}
