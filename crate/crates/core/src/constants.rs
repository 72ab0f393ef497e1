//! Moment-inequality multipliers.
//!
//! [`rosenthal_bound`] evaluates the closed-form majorant
//! `K_R(p) <= C_R · p / (e · ln p)` of the Rosenthal constant, where `ln` is
//! the natural logarithm (the `e` in the denominator fixes the base).
//! [`mixingale_coefficient`] evaluates
//! `K_M(m) = m · [ Σ_{k≥1} β(k) (k+1)^{(m-2)/2} ]^{1/m}` for a superstrong
//! mixing schedule `β`, refusing to truncate the series without a
//! certificate on its remainder.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::scalar::Real;

/// `C_R` for general centered summands.
pub const ROSENTHAL_C: f64 = 1.77638;
/// `C_R` for symmetrically distributed summands.
pub const ROSENTHAL_C_SYMMETRIC: f64 = 1.53572;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstantsError {
    #[error("moment order {p} is below 2")]
    MomentOrderTooSmall { p: f64 },
    #[error("mixingale order m = {m} must be finite and at least 1")]
    InvalidOrder { m: f64 },
    #[error("tolerance must be positive, got {tol}")]
    InvalidTolerance { tol: f64 },
    #[error("beta({k}) = {value} is negative or not finite")]
    InvalidBeta { k: usize, value: f64 },
    #[error("beta schedule declared nonincreasing but beta({k}) > beta({})", k - 1)]
    NotNonincreasing { k: usize },
    #[error("tail certificate parameters are invalid: {reason}")]
    InvalidCertificate { reason: &'static str },
    #[error("series for K_M({m}) not certified within tolerance after {k_max} terms")]
    ConvergenceUndecidable { m: f64, k_max: usize },
    #[error("tail certificate proves the series for K_M({m}) diverges")]
    DivergentSeries { m: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RosenthalQuery<S> {
    pub p: S,
    pub symmetric: bool,
}

impl<S: Real> RosenthalQuery<S> {
    pub fn new(p: S) -> Self {
        Self { p, symmetric: false }
    }

    pub fn symmetric(p: S) -> Self {
        Self { p, symmetric: true }
    }
}

/// `C · p / (e · ln p)` for `p >= 2`.
pub fn rosenthal_bound<S: Real>(q: RosenthalQuery<S>) -> Result<S, ConstantsError> {
    let p = q.p;
    if !(p >= S::lit(2.0)) || !p.is_finite() {
        return Err(ConstantsError::MomentOrderTooSmall { p: p.to_f64().unwrap_or(f64::NAN) });
    }
    let c = S::lit(if q.symmetric { ROSENTHAL_C_SYMMETRIC } else { ROSENTHAL_C });
    let e = S::lit(std::f64::consts::E);
    Ok(c * (p / (e * p.ln())))
}

/// Certified information about `β(k)` beyond the evaluated prefix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailCertificate {
    /// `β(k) <= constant · ratio^k` for every `k >= 1`, with `0 <= ratio < 1`.
    GeometricMajorant { constant: f64, ratio: f64 },
    /// `β(k) <= constant · k^{-exponent}` for every `k >= 1`.
    PowerMajorant { constant: f64, exponent: f64 },
    /// `β(k) >= constant · k^{-exponent}` for every `k >= 1`, `constant > 0`.
    PowerMinorant { constant: f64, exponent: f64 },
}

#[derive(Clone)]
enum BetaSequence {
    /// `β(1), …, β(len)`, zero afterwards.
    Finite(Vec<f64>),
    Function(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

/// The sequence `k ↦ β(k)`, `k >= 1`.
#[derive(Clone)]
pub struct MixingSchedule {
    beta: BetaSequence,
    k_max: usize,
    tail: Option<TailCertificate>,
    nonincreasing: bool,
}

impl fmt::Debug for MixingSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let beta = match &self.beta {
            BetaSequence::Finite(v) => format!("{v:?}"),
            BetaSequence::Function(_) => "<fn>".to_string(),
        };
        f.debug_struct("MixingSchedule")
            .field("beta", &beta)
            .field("k_max", &self.k_max)
            .field("tail", &self.tail)
            .field("nonincreasing", &self.nonincreasing)
            .finish()
    }
}

impl MixingSchedule {
    /// Finitely supported schedule: `values[k-1] = β(k)`, zero beyond.
    pub fn finite(values: Vec<f64>) -> Self {
        let k_max = values.len();
        Self { beta: BetaSequence::Finite(values), k_max, tail: None, nonincreasing: false }
    }

    /// The identically zero schedule (independent sigma-algebras).
    pub fn zero() -> Self {
        Self::finite(Vec::new())
    }

    /// Schedule given by a function, evaluated for `k = 1..=k_max`.
    pub fn from_fn(beta: impl Fn(usize) -> f64 + Send + Sync + 'static, k_max: usize) -> Self {
        Self { beta: BetaSequence::Function(Arc::new(beta)), k_max, tail: None, nonincreasing: false }
    }

    pub fn with_tail(mut self, tail: TailCertificate) -> Self {
        self.tail = Some(tail);
        self
    }

    /// Declares `β(k+1) <= β(k)`; evaluation rejects schedules that break it.
    pub fn nonincreasing(mut self) -> Self {
        self.nonincreasing = true;
        self
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn tail(&self) -> Option<TailCertificate> {
        self.tail
    }

    pub fn beta(&self, k: usize) -> f64 {
        match &self.beta {
            BetaSequence::Finite(v) => {
                if k >= 1 && k <= v.len() {
                    v[k - 1]
                } else {
                    0.0
                }
            }
            BetaSequence::Function(f) => f(k),
        }
    }

    /// Multiplies every `β(k)` by `c`; certificates scale with it.
    pub fn scaled(&self, c: f64) -> Self {
        let beta = match &self.beta {
            BetaSequence::Finite(v) => BetaSequence::Finite(v.iter().map(|b| b * c).collect()),
            BetaSequence::Function(f) => {
                let f = f.clone();
                BetaSequence::Function(Arc::new(move |k| c * f(k)))
            }
        };
        let tail = self.tail.map(|t| match t {
            TailCertificate::GeometricMajorant { constant, ratio } => {
                TailCertificate::GeometricMajorant { constant: constant * c, ratio }
            }
            TailCertificate::PowerMajorant { constant, exponent } => {
                TailCertificate::PowerMajorant { constant: constant * c, exponent }
            }
            TailCertificate::PowerMinorant { constant, exponent } => {
                TailCertificate::PowerMinorant { constant: constant * c, exponent }
            }
        });
        Self { beta, tail, ..self.clone() }
    }

    fn finite_support(&self) -> Option<usize> {
        match &self.beta {
            BetaSequence::Finite(v) => Some(v.len()),
            BetaSequence::Function(_) => None,
        }
    }
}

/// Upper bound on `Σ_{k > n} β(k)(k+1)^a` from a majorant certificate, or
/// `None` when the certificate cannot bound that remainder.
fn remainder_bound(tail: TailCertificate, a: f64, n: usize) -> Option<f64> {
    let n = n as f64;
    match tail {
        TailCertificate::GeometricMajorant { constant, ratio } => {
            // term ratio t_{k+1}/t_k = r ((k+2)/(k+1))^a, maximal at k = n+1 when a > 0
            let growth = if a > 0.0 { ((n + 3.0) / (n + 2.0)).powf(a) } else { 1.0 };
            let rho = ratio * growth;
            if rho >= 1.0 {
                return None;
            }
            let first = constant * ratio.powf(n + 1.0) * (n + 2.0).powf(a);
            Some(first / (1.0 - rho))
        }
        TailCertificate::PowerMajorant { constant, exponent } => {
            // (k+1)^a <= 2^{max(a,0)} k^a, then integral comparison for the k^{a-b} tail
            let decay = exponent - a;
            if decay <= 1.0 || n < 1.0 {
                return None;
            }
            let c = constant * 2f64.powf(a.max(0.0));
            Some(c * n.powf(1.0 - decay) / (decay - 1.0))
        }
        TailCertificate::PowerMinorant { .. } => None,
    }
}

fn validate_certificate(tail: TailCertificate) -> Result<(), ConstantsError> {
    let bad = |reason| Err(ConstantsError::InvalidCertificate { reason });
    match tail {
        TailCertificate::GeometricMajorant { constant, ratio } => {
            if !(constant >= 0.0 && constant.is_finite()) {
                return bad("geometric constant must be finite and nonnegative");
            }
            if !(0.0..1.0).contains(&ratio) {
                return bad("geometric ratio must lie in [0, 1)");
            }
        }
        TailCertificate::PowerMajorant { constant, exponent } => {
            if !(constant >= 0.0 && constant.is_finite() && exponent.is_finite()) {
                return bad("power majorant needs a finite nonnegative constant");
            }
        }
        TailCertificate::PowerMinorant { constant, exponent } => {
            if !(constant > 0.0 && constant.is_finite() && exponent.is_finite()) {
                return bad("power minorant needs a finite positive constant");
            }
        }
    }
    Ok(())
}

/// `K_M(m)`, certified to lie within `tol` of the full series value.
pub fn mixingale_coefficient(m: f64, schedule: &MixingSchedule, tol: f64) -> Result<f64, ConstantsError> {
    if !(m >= 1.0) || !m.is_finite() {
        return Err(ConstantsError::InvalidOrder { m });
    }
    if !(tol > 0.0) {
        return Err(ConstantsError::InvalidTolerance { tol });
    }
    let a = (m - 2.0) / 2.0;
    if let Some(tail) = schedule.tail {
        validate_certificate(tail)?;
        if let TailCertificate::PowerMinorant { exponent, .. } = tail {
            // β(k)(k+1)^a >= c' k^{a-b}: harmonic-type divergence when b - a <= 1
            if exponent - a <= 1.0 && schedule.finite_support().is_none() {
                return Err(ConstantsError::DivergentSeries { m });
            }
        }
    }
    let finite = schedule.finite_support();
    let k_max = finite.unwrap_or(schedule.k_max);

    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for k in 1..=k_max {
        let b = schedule.beta(k);
        if !(b >= 0.0) || !b.is_finite() {
            return Err(ConstantsError::InvalidBeta { k, value: b });
        }
        if schedule.nonincreasing && b > prev {
            return Err(ConstantsError::NotNonincreasing { k });
        }
        prev = b;
        if b > 0.0 {
            sum += b * ((k + 1) as f64).powf(a);
        }
        if finite.is_none() {
            if let Some(rem) = schedule.tail.and_then(|t| remainder_bound(t, a, k)) {
                let spread = m * ((sum + rem).powf(1.0 / m) - sum.powf(1.0 / m));
                if spread < tol {
                    return Ok(m * sum.powf(1.0 / m));
                }
            }
        }
    }
    if finite.is_some() {
        return Ok(m * sum.powf(1.0 / m));
    }
    Err(ConstantsError::ConvergenceUndecidable { m, k_max })
}
