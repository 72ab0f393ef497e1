use mixnorm::constants::{rosenthal_bound, RosenthalQuery};
use mixnorm::lab::{
    check_moment_bound, check_sobolev_bound, clt_convergence_test, empirical_permutation_check,
    estimate_norm_moment, ks_two_sample, moment_bound_rhs, normed_sum_samples, tail_probe, ConstantKind, LabError, ReportRow, TailSpec,
    VerificationReport, REPORT_HEADER,
};
use mixnorm::models::Driver;
use mixnorm::selftest::{white_noise_config, GAUSSIAN_2X2_RHS};
use mixnorm::Operator;

fn gaussian_2x2(replicas: usize, seed: u64) -> mixnorm::lab::ExperimentConfig {
    white_noise_config(&[2, 2], Driver::Gaussian, &[2.0, 2.0], 2.0, &[4, 16], replicas, seed)
}

#[test]
fn rhs_examples() {
    let rhs = moment_bound_rhs(&gaussian_2x2(100, 1)).unwrap();
    assert!((rhs.value - GAUSSIAN_2X2_RHS).abs() < 1e-12 * GAUSSIAN_2X2_RHS);
    assert_eq!(rhs.kind, ConstantKind::Rosenthal);
    assert!(rhs.moment_exact);

    // single Rademacher cell: |moment field| = 1, so the bound is K_R(2)
    let cfg = white_noise_config(&[1], Driver::Rademacher, &[2.0], 1.0, &[4], 100, 1);
    let k2 = rosenthal_bound(RosenthalQuery::new(2.0)).unwrap();
    assert!((moment_bound_rhs(&cfg).unwrap().value - k2).abs() < 1e-15);
    assert!((k2 - 1.885_584).abs() < 1e-6);
}

#[test]
fn zero_envelope_gives_zero_sums() {
    let mut cfg = gaussian_2x2(100, 2);
    cfg.model = cfg.model.with_envelope_scaled(0.0).unwrap();
    let e = estimate_norm_moment(&cfg, 8).unwrap();
    assert_eq!((e.value, e.std_error), (0.0, 0.0));
    let report = check_moment_bound(&cfg).unwrap();
    assert!(report.all_hold());
    assert!(report.rows.iter().all(|r| r.margin_ratio == 0.0));
}

#[test]
fn scaling_the_envelope_scales_both_sides() {
    let cfg = gaussian_2x2(500, 3);
    let mut big = cfg.clone();
    big.model = cfg.model.with_envelope_scaled(3.0).unwrap();
    let a = check_moment_bound(&cfg).unwrap();
    let b = check_moment_bound(&big).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert!((y.lhs.value - 3.0 * x.lhs.value).abs() < 1e-12 * y.lhs.value);
        assert!((y.rhs - 3.0 * x.rhs).abs() < 1e-12 * y.rhs);
        assert!((y.margin_ratio - x.margin_ratio).abs() < 1e-12);
    }
}

#[test]
fn a_deliberately_small_bound_fails() {
    let report = check_moment_bound(&gaussian_2x2(500, 4)).unwrap();
    let est: Vec<_> = report.rows.iter().map(|r| (r.n, r.lhs)).collect();
    let fake = VerificationReport::from_estimates("moment_bound", ConstantKind::Rosenthal, &est, 0.1);
    assert!(!fake.all_hold());
    assert!(fake.rows.iter().all(|r| r.margin_ratio > 10.0));
    let csv = fake.to_csv("fake");
    assert!(csv.starts_with(REPORT_HEADER));
    assert!(csv.lines().skip(1).all(|l| l.starts_with("fake,moment_bound,") && l.contains(",false,")));
}

#[test]
fn margin_ratio_edge_cases() {
    let report = check_moment_bound(&gaussian_2x2(100, 5)).unwrap();
    let lhs = report.rows[0].lhs;
    assert_eq!(ReportRow::new(4, lhs, 0.0).margin_ratio, f64::INFINITY);
    assert!(!ReportRow::new(4, lhs, 0.0).holds);
}

#[test]
fn identity_operator_reproduces_the_plain_check() {
    let cfg = gaussian_2x2(300, 6);
    let grid = cfg.model.grid().clone();
    let plain = check_moment_bound(&cfg).unwrap();
    let ident = check_sobolev_bound(&cfg.clone().with_operator(Operator::identity(grid.clone()))).unwrap();
    assert_eq!(plain, ident);

    let doubled = check_sobolev_bound(&cfg.clone().with_operator(Operator::scaled_identity(grid.clone(), 2.0))).unwrap();
    assert_eq!(doubled.theorem, "operator_moment_bound");
    for (a, b) in plain.rows.iter().zip(&doubled.rows) {
        assert!((b.lhs.value - 2.0 * a.lhs.value).abs() < 1e-12 * b.lhs.value);
        assert!((b.rhs - 2.0 * a.rhs).abs() < 1e-12 * b.rhs);
    }

    let zero = check_sobolev_bound(&cfg.clone().with_operator(Operator::zero(grid.clone(), grid))).unwrap();
    assert!(zero.rows.iter().all(|r| r.lhs.value == 0.0 && r.rhs == 0.0 && r.holds));
}

#[test]
fn divided_difference_bound_holds() {
    let cfg = white_noise_config(&[4, 3], Driver::Rademacher, &[2.0, 2.0], 2.0, &[4, 32], 2000, 7);
    let dd = Operator::divided_difference(cfg.model.grid().clone(), 0).unwrap();
    let report = check_sobolev_bound(&cfg.with_operator(dd)).unwrap();
    assert!(report.all_hold(), "{report:?}");
}

#[test]
fn simulated_ensemble_satisfies_the_permutation_inequality() {
    let cfg = white_noise_config(&[2, 3], Driver::CenteredExponential, &[3.0, 2.0], 1.5, &[4], 300, 8);
    let check = empirical_permutation_check(&cfg, 16).unwrap();
    assert!(check.holds, "{check:?}");
    assert!(check.lhs > 0.0);
}

#[test]
fn tail_probe_examples() {
    let spec = TailSpec { q1: 1.0, q2: 0.0, thresholds: vec![1.0, 4.0, 9.0] };
    let cfg = white_noise_config(&[1], Driver::Gaussian, &[2.0], 1.0, &[16], 20_000, 9).with_tail(spec.clone());
    let probe = tail_probe(&cfg, 16).unwrap();
    assert!(probe.dominated);
    assert!(probe.fitted_c.is_finite() && probe.fitted_c > 0.0);
    // the curve is fitted through the first threshold
    assert!((probe.rows[0].empirical_tail - probe.rows[0].bound_curve).abs() < 1e-12);

    // a zero field never exceeds anything
    let mut zero = cfg.clone();
    zero.model = cfg.model.with_envelope_scaled(0.0).unwrap();
    let probe = tail_probe(&zero, 16).unwrap();
    assert!(probe.dominated && probe.fitted_c.is_infinite());
    assert!(probe.rows.iter().all(|r| r.exceedances == 0 && r.bound_curve == 0.0));

    // a handful of exceedances is not enough to fit
    let sparse = white_noise_config(&[1], Driver::Gaussian, &[2.0], 1.0, &[16], 2000, 10)
        .with_tail(TailSpec { q1: 1.0, q2: 0.0, thresholds: vec![9.0, 16.0] });
    let count = normed_sum_samples(&sparse, 16).unwrap().iter().filter(|f| f.to_flat()[0].powi(2) > 9.0).count();
    assert!((1..10).contains(&count), "seed gives {count} exceedances");
    assert!(matches!(tail_probe(&sparse, 16), Err(LabError::InsufficientReplicas { exceedances }) if exceedances == count));

    let missing = white_noise_config(&[1], Driver::Gaussian, &[2.0], 1.0, &[16], 200, 10);
    assert!(matches!(tail_probe(&missing, 16), Err(LabError::TailSpecMissing)));
}

#[test]
fn gaussian_sums_are_already_gaussian() {
    let cfg = white_noise_config(&[3], Driver::Gaussian, &[2.0], 1.0, &[1, 7], 2000, 11);
    for row in clt_convergence_test(&cfg).unwrap() {
        assert!(row.ks_distance < row.ks_critical, "{row:?}");
    }
}

#[test]
fn ks_against_itself_is_zero() {
    let xs: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
    assert_eq!(ks_two_sample(&xs, &xs).unwrap(), 0.0);
    assert!(matches!(ks_two_sample(&[], &xs), Err(LabError::EmptySample)));
    assert!(matches!(ks_two_sample(&[f64::NAN], &xs), Err(LabError::NonFiniteSample)));
}

#[test]
fn invalid_experiments_name_the_field() {
    let cases: Vec<(mixnorm::lab::ExperimentConfig, &str)> = vec![
        (white_noise_config(&[2], Driver::Gaussian, &[1.5], 2.0, &[4], 100, 1), "exponents.p"),
        (white_noise_config(&[2], Driver::Gaussian, &[2.0], 0.5, &[4], 100, 1), "experiment.m"),
        (white_noise_config(&[2], Driver::Gaussian, &[2.0], 1.0, &[8, 4], 100, 1), "experiment.n_schedule"),
        (white_noise_config(&[2], Driver::Gaussian, &[2.0], 1.0, &[4], 10, 1), "experiment.replicas"),
        (white_noise_config(&[2], Driver::Gaussian, &[2.0, 2.0], 1.0, &[4], 100, 1), "exponents.p"),
    ];
    for (cfg, field) in cases {
        match cfg.validate() {
            Err(LabError::InvalidConfig { field: f, .. }) => assert_eq!(f, field),
            other => panic!("expected {field}, got {other:?}"),
        }
    }
}

#[test]
fn estimates_depend_only_on_the_seed() {
    let a = estimate_norm_moment(&gaussian_2x2(200, 12), 8).unwrap();
    let b = estimate_norm_moment(&gaussian_2x2(200, 12), 8).unwrap();
    let c = estimate_norm_moment(&gaussian_2x2(200, 13), 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
