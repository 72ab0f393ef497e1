use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, Weibull};
use statrs::function::gamma::{gamma, ln_gamma};

use super::ModelError;

/// Mean-zero law of one cell of one innovation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Driver {
    /// `N(0, 1)`.
    Gaussian,
    /// `±1` with probability `1/2` each.
    Rademacher,
    /// `Exp(1) - 1`.
    CenteredExponential,
    /// Random sign times a unit-scale Weibull, so `P(|W| > t) = exp(-t^shape)`.
    SymmetricWeibull { shape: f64 },
}

impl Driver {
    pub(crate) fn validate(&self) -> Result<(), ModelError> {
        if let Driver::SymmetricWeibull { shape } = *self {
            if !(shape > 0.0 && shape.is_finite()) {
                return Err(ModelError::InvalidModel {
                    field: "model.driver.shape".into(),
                    reason: format!("weibull shape must be positive and finite, got {shape}"),
                });
            }
        }
        Ok(())
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, Driver::Gaussian)
    }

    pub fn is_symmetric(&self) -> bool {
        !matches!(self, Driver::CenteredExponential)
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Driver::Gaussian | Driver::Rademacher | Driver::CenteredExponential => 1.0,
            Driver::SymmetricWeibull { shape } => gamma(1.0 + 2.0 / shape),
        }
    }

    /// `(E|D|^q)^{1/q}`.
    pub fn abs_moment_root(&self, q: f64) -> f64 {
        match *self {
            Driver::Rademacher => 1.0,
            // E|Z|^q = 2^{q/2} Γ((q+1)/2) / √π
            Driver::Gaussian => ((0.5 * q * 2f64.ln() + ln_gamma(0.5 * (q + 1.0)) - 0.5 * PI.ln()) / q).exp(),
            Driver::SymmetricWeibull { shape } => (ln_gamma(1.0 + q / shape) / q).exp(),
            // E|X-1|^q = e^{-1} [ Γ(q+1) + ∫_0^1 u^q e^u du ]
            Driver::CenteredExponential => {
                let mut inner = 0.0;
                let mut fact = 1.0;
                for j in 0..60 {
                    if j > 0 {
                        fact *= j as f64;
                    }
                    let term = 1.0 / (fact * (q + j as f64 + 1.0));
                    inner += term;
                    if term < 1e-18 * inner {
                        break;
                    }
                }
                ((gamma(q + 1.0) + inner) / std::f64::consts::E).powf(1.0 / q)
            }
        }
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Driver::Gaussian => StandardNormal.sample(rng),
            Driver::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Driver::CenteredExponential => {
                let x: f64 = Exp1.sample(rng);
                x - 1.0
            }
            Driver::SymmetricWeibull { shape } => {
                let w = Weibull::new(1.0, shape).expect("validated shape").sample(rng);
                if rng.random::<bool>() {
                    w
                } else {
                    -w
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    /// Composite Simpson on `[0, upper]` of `density(x) * x^q`.
    fn simpson(upper: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
        let h = upper / n as f64;
        let mut s = f(0.0) + f(upper);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn gaussian_moments_match_quadrature() {
        assert_relative_eq!(Driver::Gaussian.abs_moment_root(4.0), 3f64.powf(0.25), max_relative = 1e-13);
        assert_relative_eq!(Driver::Gaussian.abs_moment_root(2.0), 1.0, max_relative = 1e-13);
        for q in [1.0, 2.5, 3.0, 6.0] {
            let m = 2.0 * simpson(40.0, 40_000, |x| x.powf(q) * (-0.5 * x * x).exp() / (2.0 * PI).sqrt());
            assert_relative_eq!(Driver::Gaussian.abs_moment_root(q), m.powf(1.0 / q), max_relative = 1e-10);
        }
    }

    #[test]
    fn centered_exponential_moments_match_quadrature() {
        assert_relative_eq!(Driver::CenteredExponential.abs_moment_root(2.0), 1.0, max_relative = 1e-13);
        for q in [1.0, 3.0, 4.0, 5.5] {
            let left = simpson(1.0, 10_000, |u| u.powf(q) * (-(1.0 - u)).exp());
            let right = simpson(80.0, 160_000, |t| t.powf(q) * (-(1.0 + t)).exp());
            let m = (left + right).powf(1.0 / q);
            assert_relative_eq!(Driver::CenteredExponential.abs_moment_root(q), m, max_relative = 1e-9);
        }
    }

    #[test]
    fn weibull_moments() {
        // shape 1: |W| ~ Exp(1), E|W|^q = Γ(q+1)
        let d = Driver::SymmetricWeibull { shape: 1.0 };
        assert_relative_eq!(d.abs_moment_root(2.0), 2f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(d.variance(), 2.0, max_relative = 1e-13);
        let d = Driver::SymmetricWeibull { shape: 2.0 };
        assert_relative_eq!(d.variance(), 1.0, max_relative = 1e-13);
        assert!(Driver::SymmetricWeibull { shape: 0.0 }.validate().is_err());
    }
}
