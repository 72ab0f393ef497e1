use super::LabError;

/// Asymptotic 1% coefficient of the two-sample Kolmogorov-Smirnov test.
pub const KS_C_ONE_PERCENT: f64 = 1.63;

/// `sup_x |F_a(x) - F_b(x)|` for the empirical CDFs of `a` and `b`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64, LabError> {
    if a.is_empty() || b.is_empty() {
        return Err(LabError::EmptySample);
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(LabError::NonFiniteSample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        // step both CDFs past every copy of the smaller value
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// `c · sqrt((n_a + n_b) / (n_a n_b))`.
pub fn ks_critical(c: f64, na: usize, nb: usize) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    c * ((na + nb) / (na * nb)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a = [0.3, 1.0, -2.0, 1.0];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_supports() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0, 5.0]).unwrap(), 1.0);
    }

    #[test]
    fn small_example() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 3.0]).unwrap(), 0.5);
    }

    #[test]
    fn brute_force_agreement() {
        let a = [0.1, 0.5, 0.5, 0.9, 2.0, -1.0];
        let b = [0.5, 0.7, 3.0, -0.5];
        let cdf = |s: &[f64], x: f64| s.iter().filter(|v| **v <= x).count() as f64 / s.len() as f64;
        let brute = a.iter().chain(&b).map(|&x| (cdf(&a, x) - cdf(&b, x)).abs()).fold(0.0, f64::max);
        assert_eq!(ks_two_sample(&a, &b).unwrap(), brute);
    }

    #[test]
    fn errors_and_critical_value() {
        assert!(matches!(ks_two_sample(&[], &[1.0]), Err(LabError::EmptySample)));
        assert!(matches!(ks_two_sample(&[f64::NAN], &[1.0]), Err(LabError::NonFiniteSample)));
        assert!((ks_critical(KS_C_ONE_PERCENT, 2000, 2000) - 0.05155).abs() < 1e-5);
    }
}
