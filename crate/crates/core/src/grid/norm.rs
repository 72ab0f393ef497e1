use ndarray::{ArrayD, Axis as NdAxis};

use super::{ExponentVector, FieldEnsemble, GridError, GridField};
use crate::scalar::{abs_pow, root, Real};

/// Relative slack allowed when comparing the two sides of an inequality.
pub const INEQUALITY_REL_TOL: f64 = 1e-9;
/// Absolute floor added to the relative slack.
pub const INEQUALITY_ABS_TOL: f64 = 1e-12;

/// `lhs <= rhs` up to the rounding slack of nested power sums.
pub fn within_bound<S: Real>(lhs: S, rhs: S) -> bool {
    lhs <= rhs * (S::one() + S::lit(INEQUALITY_REL_TOL)) + S::lit(INEQUALITY_ABS_TOL)
}

/// Replaces the leading axis by its weighted `p`-norm.
fn reduce_leading<S: Real>(values: ArrayD<S>, weights: &[S], p: S) -> ArrayD<S> {
    values.map_axis(NdAxis(0), |lane| {
        let sum = lane
            .iter()
            .zip(weights)
            .filter(|(_, w)| !w.is_zero())
            .fold(S::zero(), |acc, (&v, &w)| acc + w * abs_pow(v, p));
        root(sum, p)
    })
}

fn into_scalar<S: Real>(values: ArrayD<S>) -> S {
    debug_assert_eq!(values.ndim(), 0);
    values.iter().copied().next().unwrap_or_else(S::zero)
}

/// Iterated norm: axis 1 is integrated innermost with `p_1`, axis `l`
/// outermost with `p_l`.
pub fn mixed_norm<S: Real>(f: &GridField<S>, p: &ExponentVector<S>) -> Result<S, GridError> {
    let grid = f.grid();
    if p.len() != grid.dim() {
        return Err(GridError::DimensionMismatch { expected: grid.dim(), found: p.len() });
    }
    let mut acc = f.values().clone();
    for (axis, &pk) in grid.axes().iter().zip(p.components()) {
        acc = reduce_leading(acc, axis.weights(), pk);
    }
    Ok(into_scalar(acc))
}

/// Axis reference for [`ordered_mixed_norm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormAxis {
    /// Spatial axis `k` of the ensemble grid (0-based).
    Spatial(usize),
    /// The probability axis indexing replicas.
    Replica,
}

/// Iterated norm over the spatial axes and the replica axis, integrating
/// `order[0]` innermost with `exponents[0]`.
pub fn ordered_mixed_norm<S: Real>(
    e: &FieldEnsemble<S>,
    order: &[NormAxis],
    exponents: &[S],
) -> Result<S, GridError> {
    let grid = e.grid();
    let l = grid.dim();
    if order.len() != l + 1 {
        return Err(GridError::InvalidPermutation);
    }
    if exponents.len() != order.len() {
        return Err(GridError::DimensionMismatch { expected: order.len(), found: exponents.len() });
    }
    for (index, &p) in exponents.iter().enumerate() {
        if !p.is_finite() || p < S::one() {
            return Err(GridError::InvalidExponent { index, value: p.to_f64().unwrap_or(f64::NAN) });
        }
    }
    let mut seen = vec![false; l + 1];
    let mut perm = Vec::with_capacity(l + 1);
    for axis in order {
        let k = match *axis {
            NormAxis::Spatial(k) if k < l => k,
            NormAxis::Spatial(_) => return Err(GridError::InvalidPermutation),
            NormAxis::Replica => l,
        };
        if std::mem::replace(&mut seen[k], true) {
            return Err(GridError::InvalidPermutation);
        }
        perm.push(k);
    }

    let views: Vec<_> = e.fields().iter().map(|f| f.values().view()).collect();
    let stacked = ndarray::stack(NdAxis(l), &views).expect("ensemble fields share one shape");
    let mut acc = stacked.permuted_axes(perm.clone()).as_standard_layout().into_owned();
    for (&k, &p) in perm.iter().zip(exponents) {
        let weights = if k == l { e.replica_axis().weights() } else { grid.axis(k).weights() };
        acc = reduce_leading(acc, weights, p);
    }
    Ok(into_scalar(acc))
}

/// Both sides of the permutation inequality
/// `|φ|_{p⃗,X; r,Ω} <= |φ|_{r,Ω; p⃗,X}` for `r >= p̄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PermutationCheck<S> {
    /// Spatial norm inside, replica norm outside.
    pub lhs: S,
    /// Replica norm inside, spatial norm outside.
    pub rhs: S,
    pub holds: bool,
}

pub fn check_permutation_inequality<S: Real>(
    e: &FieldEnsemble<S>,
    p: &ExponentVector<S>,
    r: S,
) -> Result<PermutationCheck<S>, GridError> {
    let l = e.grid().dim();
    if p.len() != l {
        return Err(GridError::DimensionMismatch { expected: l, found: p.len() });
    }
    if !(r >= p.pbar()) {
        return Err(GridError::ExponentTooSmall {
            r: r.to_f64().unwrap_or(f64::NAN),
            pbar: p.pbar().to_f64().unwrap_or(f64::NAN),
        });
    }
    let spatial: Vec<NormAxis> = (0..l).map(NormAxis::Spatial).collect();

    let mut outer_order = spatial.clone();
    outer_order.push(NormAxis::Replica);
    let mut outer_exp = p.components().to_vec();
    outer_exp.push(r);
    let lhs = ordered_mixed_norm(e, &outer_order, &outer_exp)?;

    let mut inner_order = vec![NormAxis::Replica];
    inner_order.extend(spatial);
    let mut inner_exp = vec![r];
    inner_exp.extend_from_slice(p.components());
    let rhs = ordered_mixed_norm(e, &inner_order, &inner_exp)?;

    Ok(PermutationCheck { lhs, rhs, holds: within_bound(lhs, rhs) })
}
