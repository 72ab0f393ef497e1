use std::sync::Arc;

use super::GridError;
use crate::scalar::Real;

/// One discretized measure space: a list of distinct points carrying
/// nonnegative masses.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis<S> {
    label: String,
    points: Vec<S>,
    weights: Vec<S>,
}

impl<S: Real> Axis<S> {
    pub fn new(label: impl Into<String>, points: Vec<S>, weights: Vec<S>) -> Result<Self, GridError> {
        let label = label.into();
        if points.is_empty() && weights.is_empty() {
            return Err(GridError::EmptyAxis { label });
        }
        if points.len() != weights.len() {
            return Err(GridError::LengthMismatch {
                label,
                points: points.len(),
                weights: weights.len(),
            });
        }
        for (index, (&x, &w)) in points.iter().zip(&weights).enumerate() {
            if !x.is_finite() || !w.is_finite() {
                return Err(GridError::NonFiniteAxisEntry { label, index });
            }
            if w < S::zero() {
                return Err(GridError::NegativeWeight { label, index });
            }
        }
        if weights.iter().all(|w| w.is_zero()) {
            return Err(GridError::AllZeroWeights { label });
        }
        for i in 0..points.len() {
            if points[i + 1..].contains(&points[i]) {
                return Err(GridError::DuplicatePoint { label, index: i });
            }
        }
        Ok(Self { label, points, weights })
    }

    /// `n` points `0, 1, …, n-1`, each of mass `1/n`.
    pub fn probability(label: impl Into<String>, n: usize) -> Result<Self, GridError> {
        let w = S::one() / S::from_usize(n.max(1)).unwrap();
        Self::new(
            label,
            (0..n).map(|i| S::from_usize(i).unwrap()).collect(),
            vec![w; n],
        )
    }

    /// `n` points `0, 1, …, n-1` of unit mass (counting measure).
    pub fn counting(label: impl Into<String>, n: usize) -> Result<Self, GridError> {
        Self::new(
            label,
            (0..n).map(|i| S::from_usize(i).unwrap()).collect(),
            vec![S::one(); n],
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[S] {
        &self.points
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> S {
        self.weights.iter().fold(S::zero(), |acc, &w| acc + w)
    }
}

/// Product of finitely many axes. Cells are stored row-major: the last axis
/// varies fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductGrid<S> {
    axes: Vec<Axis<S>>,
}

impl<S: Real> ProductGrid<S> {
    pub fn new(axes: Vec<Axis<S>>) -> Result<Self, GridError> {
        if axes.is_empty() {
            return Err(GridError::NoAxes);
        }
        Ok(Self { axes })
    }

    pub fn shared(axes: Vec<Axis<S>>) -> Result<Arc<Self>, GridError> {
        Self::new(axes).map(Arc::new)
    }

    pub fn axes(&self) -> &[Axis<S>] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis<S> {
        &self.axes[k]
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    /// Product-measure mass of every cell, row-major.
    pub fn cell_weights(&self) -> Vec<S> {
        let mut out = vec![S::one()];
        for axis in &self.axes {
            out = out
                .iter()
                .flat_map(|&acc| axis.weights().iter().map(move |&w| acc * w))
                .collect();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_unit_mass() {
        let axis = Axis::new("x", vec![0.0], vec![1.0]).unwrap();
        assert_eq!(axis.len(), 1);
        assert_eq!(axis.total_mass(), 1.0);
    }

    #[test]
    fn uniform_probability_axis() {
        let axis = Axis::new("x", vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(axis.total_mass(), 1.0);
        let built = Axis::<f64>::probability("x", 2).unwrap();
        assert_eq!(built, axis);
    }

    #[test]
    fn rejects_negative_weight() {
        let err = Axis::new("x", vec![0.0, 1.0], vec![1.0, -1.0]).unwrap_err();
        assert!(matches!(err, GridError::NegativeWeight { index: 1, .. }));
    }

    #[test]
    fn rejects_degenerate_axes() {
        assert!(matches!(
            Axis::<f64>::new("x", vec![], vec![]),
            Err(GridError::EmptyAxis { .. })
        ));
        assert!(matches!(
            Axis::new("x", vec![0.0, 1.0], vec![0.0, 0.0]),
            Err(GridError::AllZeroWeights { .. })
        ));
        assert!(matches!(
            Axis::new("x", vec![0.0, 0.0], vec![1.0, 1.0]),
            Err(GridError::DuplicatePoint { .. })
        ));
        assert!(matches!(
            Axis::new("x", vec![0.0], vec![1.0, 1.0]),
            Err(GridError::LengthMismatch { .. })
        ));
        assert!(matches!(
            Axis::new("x", vec![0.0], vec![f64::NAN]),
            Err(GridError::NonFiniteAxisEntry { .. })
        ));
    }

    #[test]
    fn product_grid_cells() {
        let a = Axis::new("a", vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        let b = Axis::new("b", vec![0.0, 1.0, 2.0], vec![1.0, 10.0, 100.0]).unwrap();
        let grid = ProductGrid::new(vec![a, b]).unwrap();
        assert_eq!(grid.shape(), vec![2, 3]);
        assert_eq!(grid.cell_count(), 6);
        assert_eq!(grid.cell_weights(), vec![1.0, 10.0, 100.0, 2.0, 20.0, 200.0]);
        assert!(matches!(ProductGrid::<f64>::new(vec![]), Err(GridError::NoAxes)));
    }
}
