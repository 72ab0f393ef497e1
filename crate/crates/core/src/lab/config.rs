use super::LabError;
use crate::models::{RandomFieldModel, SeedSpec};
use crate::{Exponents, Operator};

/// Thresholds and exponents of the tail-shape probe. The bound curve is
/// `exp(-c · x^{q1/(q1+1)} · (ln x)^{(-q2 - q1(q1-1))/(q1+1)})`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailSpec {
    pub q1: f64,
    pub q2: f64,
    /// Strictly increasing, positive.
    pub thresholds: Vec<f64>,
}

impl TailSpec {
    pub fn power_exponent(&self) -> f64 {
        self.q1 / (self.q1 + 1.0)
    }

    pub fn log_exponent(&self) -> f64 {
        (-self.q2 - self.q1 * (self.q1 - 1.0)) / (self.q1 + 1.0)
    }

    /// `x^{power} (ln x)^{log}`.
    pub fn shape(&self, x: f64) -> f64 {
        let log_exp = self.log_exponent();
        let log_part = if log_exp == 0.0 { 1.0 } else { x.ln().powf(log_exp) };
        x.powf(self.power_exponent()) * log_part
    }

    pub(crate) fn validate(&self) -> Result<(), LabError> {
        let bad = |field, reason: &str| Err(LabError::InvalidConfig { field, reason: reason.into() });
        if !(self.q1 > 0.0 && self.q1.is_finite()) {
            return bad("tail.q1", "must be positive and finite");
        }
        if !self.q2.is_finite() {
            return bad("tail.q2", "must be finite");
        }
        if self.thresholds.is_empty() {
            return bad("tail.thresholds", "need at least one threshold");
        }
        if self.thresholds.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return bad("tail.thresholds", "thresholds must be positive and finite");
        }
        if self.thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return bad("tail.thresholds", "thresholds must be strictly increasing");
        }
        if self.log_exponent() != 0.0 && self.thresholds[0] <= std::f64::consts::E {
            return bad("tail.thresholds", "the logarithmic factor needs thresholds above e");
        }
        Ok(())
    }
}

/// One verification experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub model: RandomFieldModel,
    pub p: Exponents,
    /// Moment multiplier; the bound concerns moments of order `m · p̄`.
    pub m: f64,
    /// Strictly increasing sample sizes.
    pub n_schedule: Vec<usize>,
    pub replicas: usize,
    pub seed: SeedSpec,
    pub operator: Option<Operator>,
    pub tail: Option<TailSpec>,
}

/// Fewest replicas for which the normal-approximation interval is used.
pub const MIN_REPLICAS: usize = 100;

impl ExperimentConfig {
    pub fn new(model: RandomFieldModel, p: Exponents, m: f64, n_schedule: Vec<usize>, replicas: usize, seed: SeedSpec) -> Self {
        Self { model, p, m, n_schedule, replicas, seed, operator: None, tail: None }
    }

    pub fn with_operator(mut self, operator: Operator) -> Self {
        self.operator = Some(operator);
        self
    }

    pub fn with_tail(mut self, tail: TailSpec) -> Self {
        self.tail = Some(tail);
        self
    }

    /// `m · p̄`.
    pub fn moment_order(&self) -> f64 {
        self.m * self.p.pbar()
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |field, reason: String| Err(LabError::InvalidConfig { field, reason });
        if self.p.len() != self.model.grid().dim() {
            return bad(
                "exponents.p",
                format!("{} exponents for a {}-axis grid", self.p.len(), self.model.grid().dim()),
            );
        }
        if self.p.pbar() < 2.0 {
            return bad("exponents.p", format!("largest exponent {} is below 2", self.p.pbar()));
        }
        if !(self.m >= 1.0 && self.m.is_finite()) {
            return bad("experiment.m", format!("must be finite and at least 1, got {}", self.m));
        }
        if self.n_schedule.is_empty() || self.n_schedule[0] == 0 {
            return bad("experiment.n_schedule", "needs positive sample sizes".into());
        }
        if self.n_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return bad("experiment.n_schedule", "must be strictly increasing".into());
        }
        if self.replicas < MIN_REPLICAS {
            return bad("experiment.replicas", format!("need at least {MIN_REPLICAS}, got {}", self.replicas));
        }
        if let Some(tail) = &self.tail {
            tail.validate()?;
        }
        if let Some(op) = &self.operator {
            if **op.source() != **self.model.grid() {
                return bad("operator", "operator source grid differs from the model grid".into());
            }
            if op.target().dim() != self.p.len() {
                return bad("operator", "operator target grid needs one exponent per axis".into());
            }
        }
        Ok(())
    }
}
