//! Brute-force reference evaluators, written directly from the definitions
//! and sharing no code with the norm engine.

/// Iterated weighted norm of a row-major array by explicit recursion over
/// index tuples. `weights[k]` and `exponents[k]` belong to axis `k`; axis 0
/// is integrated innermost.
pub fn nested_mixed_norm(values: &[f64], shape: &[usize], weights: &[Vec<f64>], exponents: &[f64]) -> f64 {
    assert_eq!(shape.len(), weights.len());
    assert_eq!(shape.len(), exponents.len());
    assert_eq!(values.len(), shape.iter().product::<usize>());
    let mut index = vec![0usize; shape.len()];
    level(values, shape, weights, exponents, shape.len(), &mut index)
}

fn level(
    values: &[f64],
    shape: &[usize],
    weights: &[Vec<f64>],
    exponents: &[f64],
    k: usize,
    index: &mut Vec<usize>,
) -> f64 {
    if k == 0 {
        let mut flat = 0;
        for (i, len) in index.iter().zip(shape) {
            flat = flat * len + i;
        }
        return values[flat].abs();
    }
    let axis = k - 1;
    let p = exponents[axis];
    let mut sum = 0.0;
    for i in 0..shape[axis] {
        index[axis] = i;
        let inner = level(values, shape, weights, exponents, axis, index);
        sum += weights[axis][i] * inner.powf(p);
    }
    sum.powf(1.0 / p)
}

/// Moves axis `from` of a row-major array to position `to`, returning the new
/// values and shape.
pub fn move_axis(values: &[f64], shape: &[usize], from: usize, to: usize) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..shape.len()).collect();
    let a = order.remove(from);
    order.insert(to, a);
    let new_shape: Vec<usize> = order.iter().map(|&k| shape[k]).collect();
    let total = values.len();
    let mut out = vec![0.0; total];
    let mut new_index = vec![0usize; shape.len()];
    for (flat_new, slot) in out.iter_mut().enumerate() {
        let mut rem = flat_new;
        for k in (0..new_shape.len()).rev() {
            new_index[k] = rem % new_shape[k];
            rem /= new_shape[k];
        }
        let mut old_index = vec![0usize; shape.len()];
        for (pos, &k) in order.iter().enumerate() {
            old_index[k] = new_index[pos];
        }
        let flat_old = old_index.iter().zip(shape).fold(0, |acc, (i, len)| acc * len + i);
        *slot = values[flat_old];
    }
    (out, new_shape)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let w = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let v = [1.0, 2.0, 3.0, 4.0];
        assert!((nested_mixed_norm(&v, &[2, 2], &w, &[1.0, 2.0]) - 52f64.sqrt()).abs() < 1e-14);
        let (t, s) = move_axis(&v, &[2, 2], 0, 1);
        assert_eq!((t, s), (vec![1.0, 3.0, 2.0, 4.0], vec![2, 2]));
        let (back, s) = move_axis(&[1.0, 3.0, 2.0, 4.0], &[2, 2], 1, 0);
        assert_eq!((back, s), (v.to_vec(), vec![2, 2]));
    }
}
