//! Monte Carlo verification of moment bounds, weak convergence and tail
//! shape for normed sums `S_n = n^{-1/2} Σ_{k≤n} ξ_k`.
//!
//! Replica `i` at sample size `n` always draws from stream `i` of the key
//! `seed.derive(n)`, and per-replica statistics are reduced in replica order,
//! so every report is bitwise reproducible for any rayon worker count.

mod bounds;
mod clt;
mod config;
mod estimate;
mod ks;
mod report;
mod sum;
mod tail;

use thiserror::Error;

pub use bounds::{
    check_moment_bound, check_sobolev_bound, moment_bound_rhs, operator_moment_field, sobolev_bound_rhs,
    ConstantKind, RhsBound,
};
pub use clt::{clt_convergence_test, ConvergenceRow};
pub use config::{ExperimentConfig, TailSpec};
pub use estimate::{empirical_permutation_check, estimate_norm_moment, normed_sum_samples, MomentEstimate, Z_95};
pub use ks::{ks_critical, ks_two_sample, KS_C_ONE_PERCENT};
pub use report::{convergence_csv, ReportRow, VerificationReport, CONVERGENCE_HEADER, REPORT_HEADER};
pub use sum::normed_sum;
pub use tail::{tail_probe, TailProbe, TailRow, MIN_EXCEEDANCES};

use crate::constants::ConstantsError;
use crate::grid::GridError;
use crate::models::ModelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid experiment at `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("normed sum of an empty list")]
    EmptyList,
    #[error("empty sample")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFiniteSample,
    #[error("experiment has no tail section")]
    TailSpecMissing,
    #[error("experiment has no operator section")]
    OperatorMissing,
    #[error("only {exceedances} exceedances at the smallest threshold, need {MIN_EXCEEDANCES}")]
    InsufficientReplicas { exceedances: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Constants(#[from] ConstantsError),
}
