use std::sync::Arc;

use ndarray::{Array1, Array2};

use super::field::same_grid;
use super::{mixed_norm, Axis, ExponentVector, GridError, GridField, ProductGrid};
use crate::scalar::Real;

/// Linear map between fields on two grids, stored as a dense matrix acting on
/// row-major flattened cells (`rows = target cells`, `cols = source cells`).
#[derive(Clone, Debug)]
pub struct OperatorMatrix<S> {
    source: Arc<ProductGrid<S>>,
    target: Arc<ProductGrid<S>>,
    entries: Array2<S>,
}

impl<S: Real> OperatorMatrix<S> {
    pub fn new(
        source: Arc<ProductGrid<S>>,
        target: Arc<ProductGrid<S>>,
        entries: Array2<S>,
    ) -> Result<Self, GridError> {
        let expected = (target.cell_count(), source.cell_count());
        if entries.dim() != expected {
            return Err(GridError::OperatorShape { expected, found: entries.dim() });
        }
        if let Some(index) = entries.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFiniteValue { index });
        }
        Ok(Self { source, target, entries })
    }

    /// From `target.cell_count()` rows of `source.cell_count()` entries.
    pub fn from_rows(
        source: Arc<ProductGrid<S>>,
        target: Arc<ProductGrid<S>>,
        rows: &[Vec<S>],
    ) -> Result<Self, GridError> {
        let cols = source.cell_count();
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(GridError::OperatorShape { expected: (target.cell_count(), cols), found: (rows.len(), bad.len()) });
        }
        let flat: Vec<S> = rows.iter().flatten().copied().collect();
        let entries = Array2::from_shape_vec((rows.len(), cols), flat).expect("rows have equal length");
        Self::new(source, target, entries)
    }

    pub fn identity(grid: Arc<ProductGrid<S>>) -> Self {
        Self::scaled_identity(grid, S::one())
    }

    pub fn scaled_identity(grid: Arc<ProductGrid<S>>, c: S) -> Self {
        let n = grid.cell_count();
        let entries = Array2::from_diag_elem(n, c);
        Self { source: grid.clone(), target: grid, entries }
    }

    pub fn zero(source: Arc<ProductGrid<S>>, target: Arc<ProductGrid<S>>) -> Self {
        let entries = Array2::zeros((target.cell_count(), source.cell_count()));
        Self { source, target, entries }
    }

    /// Forward divided difference `(f(x_{i+1}) - f(x_i)) / (x_{i+1} - x_i)`
    /// along `axis`. The target grid drops the last point of that axis and
    /// keeps the left endpoints with their masses.
    pub fn divided_difference(grid: Arc<ProductGrid<S>>, axis: usize) -> Result<Self, GridError> {
        if axis >= grid.dim() {
            return Err(GridError::DimensionMismatch { expected: grid.dim(), found: axis + 1 });
        }
        let src_axis = grid.axis(axis);
        let n = src_axis.len();
        if n < 2 {
            return Err(GridError::AxisTooShort { label: src_axis.label().to_string() });
        }
        let diff_axis = Axis::new(
            format!("d{}", src_axis.label()),
            src_axis.points()[..n - 1].to_vec(),
            src_axis.weights()[..n - 1].to_vec(),
        )?;
        let mut target_axes = grid.axes().to_vec();
        target_axes[axis] = diff_axis;
        let target = ProductGrid::shared(target_axes)?;

        let src_shape = grid.shape();
        let tgt_shape = target.shape();
        // stride of `axis` in the row-major layouts
        let src_stride: usize = src_shape[axis + 1..].iter().product();
        let mut entries = Array2::zeros((target.cell_count(), grid.cell_count()));
        let mut index = vec![0usize; tgt_shape.len()];
        for row in 0..target.cell_count() {
            let mut rem = row;
            for k in (0..tgt_shape.len()).rev() {
                index[k] = rem % tgt_shape[k];
                rem /= tgt_shape[k];
            }
            let col = index.iter().zip(&src_shape).fold(0, |acc, (&i, &len)| acc * len + i);
            let i = index[axis];
            let h = src_axis.points()[i + 1] - src_axis.points()[i];
            entries[[row, col]] = -h.recip();
            entries[[row, col + src_stride]] = h.recip();
        }
        Ok(Self { source: grid, target, entries })
    }

    pub fn source(&self) -> &Arc<ProductGrid<S>> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ProductGrid<S>> {
        &self.target
    }

    pub fn entries(&self) -> &Array2<S> {
        &self.entries
    }

    pub fn scaled(&self, c: S) -> Self {
        Self { entries: self.entries.mapv(|v| v * c), ..self.clone() }
    }

    /// `A·f` reshaped onto the target grid.
    pub fn apply(&self, f: &GridField<S>) -> Result<GridField<S>, GridError> {
        if !same_grid(f.grid(), &self.source) {
            return Err(GridError::GridMismatch);
        }
        Ok(self.apply_flat(&f.to_flat()))
    }

    pub(crate) fn apply_flat(&self, flat: &[S]) -> GridField<S> {
        let v = Array1::from(flat.to_vec());
        let out = self.entries.dot(&v);
        GridField::from_flat_unchecked(self.target.clone(), out.to_vec())
    }
}

pub fn apply_operator<S: Real>(a: &OperatorMatrix<S>, f: &GridField<S>) -> Result<GridField<S>, GridError> {
    a.apply(f)
}

/// `max(|f|_p, |A f|_{p_target})`.
pub fn sobolev_norm<S: Real>(
    f: &GridField<S>,
    a: &OperatorMatrix<S>,
    p: &ExponentVector<S>,
    p_target: &ExponentVector<S>,
) -> Result<S, GridError> {
    let base = mixed_norm(f, p)?;
    let image = mixed_norm(&a.apply(f)?, p_target)?;
    Ok(base.max(image))
}
