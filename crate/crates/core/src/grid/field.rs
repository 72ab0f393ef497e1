use std::sync::Arc;

use ndarray::{ArrayD, IxDyn};

use super::{Axis, GridError, ProductGrid};
use crate::scalar::Real;

/// Per-axis exponents `p_1, …, p_l`, each in `[1, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentVector<S> {
    components: Vec<S>,
    pbar: S,
}

impl<S: Real> ExponentVector<S> {
    pub fn new(components: Vec<S>) -> Result<Self, GridError> {
        if components.is_empty() {
            return Err(GridError::NoAxes);
        }
        for (index, &p) in components.iter().enumerate() {
            if !p.is_finite() || p < S::one() {
                return Err(GridError::InvalidExponent { index, value: p.to_f64().unwrap_or(f64::NAN) });
            }
        }
        let pbar = components.iter().copied().fold(S::one(), S::max);
        Ok(Self { components, pbar })
    }

    pub fn uniform(p: S, len: usize) -> Result<Self, GridError> {
        Self::new(vec![p; len])
    }

    pub fn components(&self) -> &[S] {
        &self.components
    }

    /// Largest component.
    pub fn pbar(&self) -> S {
        self.pbar
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Real-valued function on the cells of a product grid.
#[derive(Clone, Debug)]
pub struct GridField<S> {
    grid: Arc<ProductGrid<S>>,
    values: ArrayD<S>,
}

impl<S: Real> PartialEq for GridField<S> {
    fn eq(&self, other: &Self) -> bool {
        same_grid(&self.grid, &other.grid) && self.values == other.values
    }
}

pub(crate) fn same_grid<S: Real>(a: &Arc<ProductGrid<S>>, b: &Arc<ProductGrid<S>>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl<S: Real> GridField<S> {
    /// Values are read row-major (last axis fastest).
    pub fn from_flat(grid: Arc<ProductGrid<S>>, values: Vec<S>) -> Result<Self, GridError> {
        if values.len() != grid.cell_count() {
            return Err(GridError::ShapeMismatch { expected: grid.cell_count(), found: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFiniteValue { index });
        }
        let values = ArrayD::from_shape_vec(IxDyn(&grid.shape()), values)
            .expect("length checked against cell count");
        Ok(Self { grid, values })
    }

    pub fn from_array(grid: Arc<ProductGrid<S>>, values: ArrayD<S>) -> Result<Self, GridError> {
        if values.shape() != grid.shape().as_slice() {
            return Err(GridError::ShapeMismatch { expected: grid.cell_count(), found: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFiniteValue { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<ProductGrid<S>>) -> Self {
        let values = ArrayD::zeros(IxDyn(&grid.shape()));
        Self { grid, values }
    }

    pub fn constant(grid: Arc<ProductGrid<S>>, c: S) -> Self {
        let values = ArrayD::from_elem(IxDyn(&grid.shape()), c);
        Self { grid, values }
    }

    /// Trusted constructor for values produced inside the crate.
    pub(crate) fn from_flat_unchecked(grid: Arc<ProductGrid<S>>, values: Vec<S>) -> Self {
        let values = ArrayD::from_shape_vec(IxDyn(&grid.shape()), values)
            .expect("internal field length matches grid");
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<ProductGrid<S>> {
        &self.grid
    }

    pub fn values(&self) -> &ArrayD<S> {
        &self.values
    }

    /// Row-major copy of the values.
    pub fn to_flat(&self) -> Vec<S> {
        self.values.iter().copied().collect()
    }

    pub fn scaled(&self, c: S) -> Self {
        Self { grid: self.grid.clone(), values: self.values.mapv(|v| v * c) }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, GridError> {
        if !same_grid(&self.grid, &other.grid) {
            return Err(GridError::GridMismatch);
        }
        Ok(Self { grid: self.grid.clone(), values: &self.values + &other.values })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }
}

/// Replicas `φ(·, ω_1), …, φ(·, ω_R)` of a field on one grid, together with the
/// probability masses of the replica axis.
#[derive(Clone, Debug)]
pub struct FieldEnsemble<S> {
    replica_axis: Axis<S>,
    fields: Vec<GridField<S>>,
}

impl<S: Real> FieldEnsemble<S> {
    /// Equal mass `1/R` on each replica.
    pub fn new(fields: Vec<GridField<S>>) -> Result<Self, GridError> {
        let r = fields.len();
        if r == 0 {
            return Err(GridError::EmptyEnsemble);
        }
        let w = S::one() / S::from_usize(r).unwrap();
        Self::with_weights(fields, vec![w; r])
    }

    pub fn with_weights(fields: Vec<GridField<S>>, weights: Vec<S>) -> Result<Self, GridError> {
        if fields.is_empty() {
            return Err(GridError::EmptyEnsemble);
        }
        let grid = fields[0].grid.clone();
        if fields.iter().any(|f| !same_grid(&grid, &f.grid)) {
            return Err(GridError::GridMismatch);
        }
        let points = (0..fields.len()).map(|i| S::from_usize(i).unwrap()).collect();
        let replica_axis = Axis::new("replica", points, weights)?;
        let total = replica_axis.total_mass();
        if (total - S::one()).abs() > S::lit(1e-12) {
            return Err(GridError::NotProbability { total: total.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(Self { replica_axis, fields })
    }

    pub fn grid(&self) -> &Arc<ProductGrid<S>> {
        self.fields[0].grid()
    }

    pub fn replica_axis(&self) -> &Axis<S> {
        &self.replica_axis
    }

    pub fn fields(&self) -> &[GridField<S>] {
        &self.fields
    }

    pub fn replicas(&self) -> usize {
        self.fields.len()
    }
}
