//! Random fields `ξ(x⃗, ω)` and dependent sequences `{ξ_k}` with closed-form
//! moments, covariances and mixing schedules.

mod covariance;
mod driver;
mod model;
mod sampling;
mod seed;

use thiserror::Error;

pub use covariance::{CovarianceMatrix, PSD_TOL};
pub use driver::Driver;
pub use model::{
    beta_schedule_of, covariance_of, long_run_covariance, moment_field_for_bound, pointwise_abs_moment,
    MartingaleSpec, MomentField, MovingAverageSpec, RandomFieldModel, SpatialMode, TemporalMode,
};
pub use sampling::{sample_field, sample_gaussian_limit, sample_sequence, GaussianSampler, SequenceStream};
pub use seed::SeedSpec;

use crate::grid::GridError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model at `{field}`: {reason}")]
    InvalidModel { field: String, reason: String },
    #[error("covariance is not positive semidefinite (min eigenvalue {min_eigenvalue})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
    #[error("no closed-form moment of order {q} for {driver:?} under this model")]
    UnsupportedMoment { driver: Driver, q: f64 },
    #[error("moment order {q} must be finite and at least 1")]
    InvalidMomentOrder { q: f64 },
    #[error("no mixing schedule for this temporal mode")]
    NoScheduleAvailable,
    #[error("no closed form for the {what}")]
    NoClosedForm { what: &'static str },
    #[error("sequence length must be at least 1")]
    InvalidLength,
    #[error(transparent)]
    Grid(#[from] GridError),
}
