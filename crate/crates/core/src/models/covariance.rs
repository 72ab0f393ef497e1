use nalgebra::{DMatrix, SymmetricEigen};

use super::ModelError;

/// Symmetric positive semidefinite matrix over the flattened cells of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<f64>,
}

/// Eigenvalues below `-PSD_TOL · trace` reject the matrix; those within
/// `±PSD_TOL · trace` are treated as exact zeros.
pub const PSD_TOL: f64 = 1e-10;

impl CovarianceMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self, ModelError> {
        if !entries.is_square() {
            return Err(ModelError::InvalidModel {
                field: "covariance".into(),
                reason: format!("matrix is {}x{}, not square", entries.nrows(), entries.ncols()),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidModel { field: "covariance".into(), reason: "non-finite entry".into() });
        }
        let scale = entries.amax().max(1.0);
        let n = entries.nrows();
        for i in 0..n {
            for j in 0..i {
                if (entries[(i, j)] - entries[(j, i)]).abs() > 1e-12 * scale {
                    return Err(ModelError::InvalidModel {
                        field: "covariance".into(),
                        reason: format!("entries ({i},{j}) and ({j},{i}) differ"),
                    });
                }
            }
        }
        let out = Self { entries };
        out.factor()?;
        Ok(out)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(ModelError::InvalidModel { field: "covariance".into(), reason: "ragged rows".into() });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Self { entries: DMatrix::identity(n, n) }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self { entries: DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)) }
    }

    pub(crate) fn from_trusted(entries: DMatrix<f64>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// `L` with `L Lᵀ = self`, from the symmetric eigendecomposition with
    /// negligible eigenvalues dropped. Columns = retained rank.
    pub fn factor(&self) -> Result<DMatrix<f64>, ModelError> {
        let n = self.dim();
        let trace = self.entries.trace().abs();
        let tol = PSD_TOL * trace.max(f64::MIN_POSITIVE);
        let eig = SymmetricEigen::new(self.entries.clone());
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if n > 0 && min < -tol {
            return Err(ModelError::NotPositiveSemidefinite { min_eigenvalue: min });
        }
        let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > tol).collect();
        Ok(DMatrix::from_fn(n, keep.len(), |i, c| {
            let k = keep[c];
            eig.eigenvectors[(i, k)] * eig.eigenvalues[k].sqrt()
        }))
    }
}
