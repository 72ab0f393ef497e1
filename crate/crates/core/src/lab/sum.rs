use super::LabError;
use crate::Field;

/// Adds `src` into `acc` cellwise.
pub(crate) fn accumulate(acc: &mut [f64], src: &[f64]) {
    for (a, s) in acc.iter_mut().zip(src) {
        *a += s;
    }
}

/// Divides an accumulated sum of `n` terms by `√n`.
pub(crate) fn normalize(acc: &mut [f64], n: usize) {
    let root_n = (n as f64).sqrt();
    for a in acc.iter_mut() {
        *a /= root_n;
    }
}

/// `n^{-1/2} Σ_k ξ_k` cellwise.
pub fn normed_sum(fields: &[Field]) -> Result<Field, LabError> {
    let first = fields.first().ok_or(LabError::EmptyList)?;
    let grid = first.grid();
    let mut acc = vec![0.0; grid.cell_count()];
    for f in fields {
        if **f.grid() != **grid {
            return Err(crate::grid::GridError::GridMismatch.into());
        }
        accumulate(&mut acc, &f.to_flat());
    }
    normalize(&mut acc, fields.len());
    Ok(Field::from_flat_unchecked(grid.clone(), acc))
}
