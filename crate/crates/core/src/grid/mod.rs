//! Discretized product measure spaces and iterated (mixed) Lebesgue norms.
//!
//! Integrals are weighted sums over finite point sets. A field on an
//! `l`-axis grid is reduced one axis at a time, first axis innermost, so
//! that `|f|_{p⃗} = ( Σ_{x_l} μ_l ( … ( Σ_{x_1} μ_1 |f|^{p_1} )^{p_2/p_1} … ) )^{1/p_l}`.

mod axis;
mod field;
mod norm;
mod operator;

use thiserror::Error;

pub use axis::{Axis, ProductGrid};
pub use field::{ExponentVector, FieldEnsemble, GridField};
pub use norm::{
    check_permutation_inequality, mixed_norm, ordered_mixed_norm, within_bound, NormAxis, PermutationCheck,
    INEQUALITY_ABS_TOL, INEQUALITY_REL_TOL,
};
pub use operator::{apply_operator, sobolev_norm, OperatorMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("axis `{label}` has no points")]
    EmptyAxis { label: String },
    #[error("axis `{label}`: {points} points but {weights} weights")]
    LengthMismatch { label: String, points: usize, weights: usize },
    #[error("axis `{label}`: weight {index} is negative")]
    NegativeWeight { label: String, index: usize },
    #[error("axis `{label}`: every weight is zero")]
    AllZeroWeights { label: String },
    #[error("axis `{label}`: point {index} repeats an earlier point")]
    DuplicatePoint { label: String, index: usize },
    #[error("axis `{label}`: entry {index} is not finite")]
    NonFiniteAxisEntry { label: String, index: usize },
    #[error("axis `{label}` needs at least two points")]
    AxisTooShort { label: String },
    #[error("a grid needs at least one axis")]
    NoAxes,
    #[error("expected {expected} cells, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("value {index} is not finite")]
    NonFiniteValue { index: usize },
    #[error("exponent {index} = {value} is outside [1, inf)")]
    InvalidExponent { index: usize, value: f64 },
    #[error("expected {expected} exponents/axes, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("axis order is not a permutation of the spatial axes plus the replica axis")]
    InvalidPermutation,
    #[error("replica exponent r = {r} is below pbar = {pbar}")]
    ExponentTooSmall { r: f64, pbar: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("operator matrix is {found:?}, expected {expected:?}")]
    OperatorShape { expected: (usize, usize), found: (usize, usize) },
    #[error("replica weights sum to {total}, not 1")]
    NotProbability { total: f64 },
    #[error("ensemble has no replicas")]
    EmptyEnsemble,
}
