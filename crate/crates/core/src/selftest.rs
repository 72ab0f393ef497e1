//! Analytic self-checks and the Monte Carlo acceptance criteria.
//!
//! Each check returns a [`CheckOutcome`]; tolerances and thresholds are the
//! constants below. Reference values come from [`crate::oracle`] or from
//! closed forms evaluated independently of the code under test.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constants::{mixingale_coefficient, rosenthal_bound, MixingSchedule, RosenthalQuery, TailCertificate};
use crate::grid::{
    apply_operator, check_permutation_inequality, mixed_norm, sobolev_norm, Axis, NormAxis, ProductGrid,
};
use crate::lab::{
    check_moment_bound, clt_convergence_test, convergence_csv, ks_critical, ks_two_sample, moment_bound_rhs,
    normed_sum, tail_probe, ExperimentConfig, TailSpec, KS_C_ONE_PERCENT,
};
use crate::models::{
    pointwise_abs_moment, Driver, MartingaleSpec, MovingAverageSpec, RandomFieldModel, SeedSpec, TemporalMode,
};
use crate::oracle::{move_axis, nested_mixed_norm};
use crate::{Ensemble, Exponents, Field, Grid, Operator};

/// Relative agreement required between the norm engine and the oracle.
pub const ORACLE_REL_TOL: f64 = 1e-12;
/// Number of random norm instances checked against the oracle.
pub const ORACLE_INSTANCES: usize = 500;
/// Number of random ensembles for the permutation inequality.
pub const PERMUTATION_ENSEMBLES: usize = 10_000;
/// Allowed deviation of a Monte Carlo estimate from its exact value, in
/// standard errors.
pub const ESTIMATE_SIGMAS: f64 = 3.0;
/// Largest allowed `max_n lhs / min_n lhs` for the martingale variant.
pub const MARTINGALE_SPREAD: f64 = 2.0;

/// `(E[(χ²_4)²])^{1/4} = 24^{1/4}`: exact left side for the 2×2 Gaussian case.
pub const GAUSSIAN_2X2_LHS: f64 = 2.213_363_839_400_643;
/// `K_R(4) · 3^{1/4} · 2` with `K_R(4) = 1.77638 · 4 / (e ln 4)`.
pub const GAUSSIAN_2X2_RHS: f64 = 4.963_136_697_345_818;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), passed, detail: detail.into() }
    }

    fn failed(name: &str, err: impl std::fmt::Display) -> Self {
        Self::new(name, false, format!("error: {err}"))
    }

    pub fn line(&self) -> String {
        format!("[{}] {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn within_time(start: Instant, limit: Duration) -> (bool, String) {
    let e = start.elapsed();
    (e <= limit, format!("{:.2}s of {}s", e.as_secs_f64(), limit.as_secs()))
}

fn counting_grid(shape: &[usize]) -> Arc<Grid> {
    let axes = shape.iter().enumerate().map(|(k, &n)| Axis::counting(format!("x{}", k + 1), n).unwrap()).collect();
    ProductGrid::shared(axes).unwrap()
}

fn f_1234() -> Field {
    Field::from_flat(counting_grid(&[2, 2]), vec![1.0, 2.0, 3.0, 4.0]).unwrap()
}

/// Experiment on a unit-weight grid with unit envelope.
pub fn white_noise_config(
    shape: &[usize],
    driver: Driver,
    p: &[f64],
    m: f64,
    n_schedule: &[usize],
    replicas: usize,
    seed: u64,
) -> ExperimentConfig {
    let model = RandomFieldModel::white_noise(Field::constant(counting_grid(shape), 1.0), driver).unwrap();
    ExperimentConfig::new(
        model,
        Exponents::new(p.to_vec()).unwrap(),
        m,
        n_schedule.to_vec(),
        replicas,
        SeedSpec::new(seed, 0),
    )
}

struct RandomInstance {
    values: Vec<f64>,
    shape: Vec<usize>,
    weights: Vec<Vec<f64>>,
}

fn random_instance(rng: &mut ChaCha8Rng, max_axes: usize, max_points: usize) -> RandomInstance {
    let l = rng.random_range(1..=max_axes);
    let shape: Vec<usize> = (0..l).map(|_| rng.random_range(1..=max_points)).collect();
    // weights in (0, 2]
    let weights: Vec<Vec<f64>> = shape.iter().map(|&n| (0..n).map(|_| 2.0 - rng.random_range(0.0..2.0)).collect()).collect();
    let values = (0..shape.iter().product::<usize>()).map(|_| rng.random_range(-3.0..3.0)).collect();
    RandomInstance { values, shape, weights }
}

fn instance_grid(inst: &RandomInstance) -> Arc<Grid> {
    let axes = inst
        .shape
        .iter()
        .zip(&inst.weights)
        .enumerate()
        .map(|(k, (&n, w))| Axis::new(format!("x{k}"), (0..n).map(|i| i as f64).collect(), w.clone()).unwrap())
        .collect();
    ProductGrid::shared(axes).unwrap()
}

/// Random instances of the norm engine against the nested-sum oracle.
pub fn norm_oracle_equivalence(instances: usize) -> CheckOutcome {
    const NAME: &str = "norm engine matches brute-force oracle";
    let start = Instant::now();
    let fixed = [
        (vec![1.0, 2.0], 52f64.sqrt()),
        (vec![2.0, 2.0], 30f64.sqrt()),
    ];
    for (p, expected) in fixed {
        let got = mixed_norm(&f_1234(), &Exponents::new(p.clone()).unwrap()).unwrap();
        if !rel_close(got, expected, ORACLE_REL_TOL) {
            return CheckOutcome::new(NAME, false, format!("2x2 p={p:?}: got {got}, expected {expected}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e6f726d);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let inst = random_instance(&mut rng, 4, 6);
        let p: Vec<f64> = inst.shape.iter().map(|_| rng.random_range(1.0..=4.0)).collect();
        let field = Field::from_flat(instance_grid(&inst), inst.values.clone()).unwrap();
        let got = mixed_norm(&field, &Exponents::new(p.clone()).unwrap()).unwrap();
        let want = nested_mixed_norm(&inst.values, &inst.shape, &inst.weights, &p);
        worst = worst.max((got - want).abs() / want.abs().max(f64::MIN_POSITIVE));
    }
    let (fast, time) = within_time(start, Duration::from_secs(10));
    CheckOutcome::new(
        NAME,
        worst <= ORACLE_REL_TOL && fast,
        format!("{instances} instances + fixed vectors, worst rel err {worst:.2e} (tol {ORACLE_REL_TOL:.0e}), {time}"),
    )
}

/// Random ensembles: the permutation inequality holds, both sides agree with
/// the oracle, and constant-in-ω ensembles give equality.
pub fn permutation_inequality(ensembles: usize) -> CheckOutcome {
    const NAME: &str = "permutation inequality";
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7065726d);
    let mut violations = 0;
    let mut worst_oracle: f64 = 0.0;
    let mut worst_equality: f64 = 0.0;
    for e in 0..ensembles {
        let inst = random_instance(&mut rng, 3, 4);
        let grid = instance_grid(&inst);
        let cells = inst.values.len();
        let replicas = rng.random_range(1..=8);
        let constant = e % 10 == 0;
        let fields: Vec<Field> = (0..replicas)
            .map(|_| {
                let v = if constant {
                    inst.values.clone()
                } else {
                    (0..cells).map(|_| rng.random_range(-3.0..3.0)).collect()
                };
                Field::from_flat(grid.clone(), v).unwrap()
            })
            .collect();
        let p: Vec<f64> = inst.shape.iter().map(|_| rng.random_range(1.0..=3.0)).collect();
        let exps = Exponents::new(p.clone()).unwrap();
        let r = exps.pbar() + rng.random_range(0.0..2.0);
        let ensemble = Ensemble::new(fields.clone()).unwrap();
        let check = check_permutation_inequality(&ensemble, &exps, r).unwrap();
        if !check.holds {
            violations += 1;
        }

        // oracle: stack replicas as the last axis, then move it innermost
        let mut stacked = Vec::with_capacity(cells * replicas);
        for c in 0..cells {
            for f in &fields {
                stacked.push(f.values().as_slice().unwrap()[c]);
            }
        }
        let mut shape = inst.shape.clone();
        shape.push(replicas);
        let mut weights = inst.weights.clone();
        weights.push(vec![1.0 / replicas as f64; replicas]);
        let mut outer_exp = p.clone();
        outer_exp.push(r);
        let lhs = nested_mixed_norm(&stacked, &shape, &weights, &outer_exp);
        let l = inst.shape.len();
        let (moved, moved_shape) = move_axis(&stacked, &shape, l, 0);
        let mut moved_weights = vec![weights[l].clone()];
        moved_weights.extend(inst.weights.iter().cloned());
        let mut inner_exp = vec![r];
        inner_exp.extend(&p);
        let rhs = nested_mixed_norm(&moved, &moved_shape, &moved_weights, &inner_exp);
        for (got, want) in [(check.lhs, lhs), (check.rhs, rhs)] {
            worst_oracle = worst_oracle.max((got - want).abs() / want.max(f64::MIN_POSITIVE));
        }
        if constant {
            worst_equality = worst_equality.max((check.lhs - check.rhs).abs() / check.rhs.max(f64::MIN_POSITIVE));
        }
    }
    let (fast, time) = within_time(start, Duration::from_secs(60));
    CheckOutcome::new(
        NAME,
        violations == 0 && worst_equality <= 1e-12 && worst_oracle <= ORACLE_REL_TOL && fast,
        format!(
            "{ensembles} ensembles, {violations} violations, constant-in-omega max rel gap {worst_equality:.2e}, \
             oracle rel err {worst_oracle:.2e}, {time}"
        ),
    )
}

/// Closed-form Rosenthal majorant and the finite mixingale coefficient.
pub fn moment_constants() -> CheckOutcome {
    const NAME: &str = "Rosenthal and mixingale constants";
    let e = std::f64::consts::E;
    let kr = rosenthal_bound(RosenthalQuery::new(e));
    let ks = rosenthal_bound(RosenthalQuery::symmetric(e));
    let km = mixingale_coefficient(2.0, &MixingSchedule::finite(vec![1.0, 1.0]), 1e-12);
    match (kr, ks, km) {
        (Ok(kr), Ok(ks), Ok(km)) => {
            let ok = kr == 1.77638 && ks == 1.53572 && rel_close(km, 2.0 * 2f64.sqrt(), 1e-12);
            CheckOutcome::new(NAME, ok, format!("K_R(e) = {kr}, symmetric {ks}, K_M(2) for beta=(1,1) = {km}"))
        }
        (a, b, c) => CheckOutcome::new(NAME, false, format!("{a:?} {b:?} {c:?}")),
    }
}

/// Moment bound for white noise on a 2×2 grid, `p⃗ = (2, 2)`, `m = 2`.
pub fn moment_bound_white_noise() -> CheckOutcome {
    const NAME: &str = "moment bound, 2x2 white noise";
    let start = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for (driver, seed) in [(Driver::Gaussian, 401), (Driver::Rademacher, 402), (Driver::CenteredExponential, 403)] {
        let cfg = white_noise_config(&[2, 2], driver, &[2.0, 2.0], 2.0, &[4, 64, 256], 5000, seed);
        let report = match check_moment_bound(&cfg) {
            Ok(r) => r,
            Err(e) => return CheckOutcome::failed(NAME, e),
        };
        ok &= report.all_hold();
        if driver == Driver::Gaussian {
            let rhs = report.rows[0].rhs;
            let exact_rhs = 1.77638 * 4.0 / (std::f64::consts::E * 4f64.ln()) * 3f64.powf(0.25) * 2.0;
            ok &= rel_close(rhs, exact_rhs, 1e-12) && rel_close(rhs, GAUSSIAN_2X2_RHS, 1e-12);
            for row in &report.rows {
                let z = (row.lhs.value - GAUSSIAN_2X2_LHS).abs() / row.lhs.std_error;
                ok &= z <= ESTIMATE_SIGMAS;
                details.push(format!("n={} lhs={:.5}±{:.5} ({z:.2} se)", row.n, row.lhs.value, row.lhs.std_error));
            }
            details.push(format!("rhs={rhs:.6}"));
        }
        details.push(format!("{driver:?} holds={}", report.all_hold()));
    }
    let (fast, time) = within_time(start, Duration::from_secs(300));
    CheckOutcome::new(NAME, ok && fast, format!("{}; {time}", details.join(", ")))
}

/// KS distance between `|S_n|` and its Gaussian limit shrinks for Rademacher
/// white noise and stays at noise level for the Gaussian driver.
pub fn clt_convergence() -> CheckOutcome {
    const NAME: &str = "CLT convergence of the norm law";
    let start = Instant::now();
    let critical = ks_critical(KS_C_ONE_PERCENT, 2000, 2000);
    let schedule = [4, 16, 64, 256];
    let rad = white_noise_config(&[2, 3], Driver::Rademacher, &[3.0, 2.0], 1.0, &schedule, 2000, 501);
    let gau = white_noise_config(&[2, 3], Driver::Gaussian, &[3.0, 2.0], 1.0, &schedule, 2000, 502);
    let (rad, gau) = match (clt_convergence_test(&rad), clt_convergence_test(&gau)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return CheckOutcome::failed(NAME, e),
    };
    let first = rad[0].ks_distance;
    let last = rad[rad.len() - 1].ks_distance;
    let ok_rad = last < first && last < critical;
    let ok_gau = gau.iter().all(|r| r.ks_distance < critical);
    let (fast, time) = within_time(start, Duration::from_secs(600));
    let fmt = |rows: &[crate::lab::ConvergenceRow]| {
        rows.iter().map(|r| format!("{}:{:.4}", r.n, r.ks_distance)).collect::<Vec<_>>().join(" ")
    };
    CheckOutcome::new(
        NAME,
        ok_rad && ok_gau && fast,
        format!("rademacher [{}], gaussian [{}], critical {critical:.4}; {time}", fmt(&rad), fmt(&gau)),
    )
}

/// Thresholds of the tail-shape probe.
pub const TAIL_THRESHOLDS: [f64; 12] = [1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 15.0, 18.0, 22.0, 26.0, 30.0];

/// Tail of `|S_64|^{p̄}` for symmetric Weibull(1) innovations against the
/// fitted `exp(-c x^{1/2})` curve.
pub fn tail_shape() -> CheckOutcome {
    const NAME: &str = "tail estimate shape";
    let start = Instant::now();
    let cfg = white_noise_config(&[1], Driver::SymmetricWeibull { shape: 1.0 }, &[2.0], 1.0, &[64], 100_000, 601)
        .with_tail(TailSpec { q1: 1.0, q2: 0.0, thresholds: TAIL_THRESHOLDS.to_vec() });
    let probe = match tail_probe(&cfg, 64) {
        Ok(p) => p,
        Err(e) => return CheckOutcome::failed(NAME, e),
    };
    let checked = probe.rows[1..].iter().filter(|r| r.exceedances >= crate::lab::MIN_EXCEEDANCES).count();
    let (fast, time) = within_time(start, Duration::from_secs(300));
    CheckOutcome::new(
        NAME,
        probe.dominated && checked > 0 && fast,
        format!("c = {:.4}, {checked} thresholds checked, dominated = {}; {time}", probe.fitted_c, probe.dominated),
    )
}

/// Martingale-difference and m-dependent variants of the moment bound.
pub fn dependent_variants() -> CheckOutcome {
    const NAME: &str = "dependent sequences";
    let start = Instant::now();
    let schedule = [4, 64, 256];
    let mds = white_noise_config(&[2, 2], Driver::Gaussian, &[2.0, 2.0], 2.0, &schedule, 5000, 701);
    let mds = ExperimentConfig {
        model: mds
            .model
            .clone()
            .with_temporal(TemporalMode::MartingaleDifference(MartingaleSpec { feedback: 0.5, cap: 4.0, burn_in: 32 }))
            .unwrap(),
        ..mds
    };
    let ma = white_noise_config(&[2, 2], Driver::Gaussian, &[2.0, 2.0], 2.0, &schedule, 5000, 702);
    let ma = ExperimentConfig {
        model: ma
            .model
            .clone()
            .with_temporal(TemporalMode::MDependent(MovingAverageSpec {
                coefficients: vec![1.0, 0.5, 0.25],
                beta_cap: 1.0,
            }))
            .unwrap(),
        ..ma
    };
    let (mds_report, ma_report) = match (check_moment_bound(&mds), check_moment_bound(&ma)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return CheckOutcome::failed(NAME, e),
    };
    let spread = mds_report.lhs_spread();
    let implied: Vec<String> = mds_report.rows.iter().map(|r| format!("{:.3}", r.margin_ratio)).collect();
    let ok = spread <= MARTINGALE_SPREAD && ma_report.all_hold();
    let (fast, time) = within_time(start, Duration::from_secs(600));
    CheckOutcome::new(
        NAME,
        ok && fast,
        format!(
            "martingale lhs spread {spread:.3} (max {MARTINGALE_SPREAD}), monitored lhs/rhs [{}]; \
             m-dependent with K_M holds = {}; {time}",
            implied.join(" "),
            ma_report.all_hold()
        ),
    )
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool").install(f)
}

/// Report bodies do not depend on the worker count.
pub fn reproducibility() -> CheckOutcome {
    const NAME: &str = "reproducible across worker counts";
    let cfg = white_noise_config(&[2, 2], Driver::CenteredExponential, &[2.0, 2.0], 2.0, &[4, 64], 1000, 801);
    let clt = white_noise_config(&[2, 3], Driver::Rademacher, &[3.0, 2.0], 1.0, &[4, 16], 500, 802);
    let run = |workers| {
        in_pool(workers, || {
            let a = check_moment_bound(&cfg).map(|r| r.to_csv("repro"));
            let b = clt_convergence_test(&clt).map(|r| convergence_csv("repro", &r));
            (a, b)
        })
    };
    let one = run(1);
    let four = run(4);
    let ok = one.0.is_ok() && one.1.is_ok() && one == four;
    CheckOutcome::new(NAME, ok, "moment and convergence CSV bodies compared at 1 and 4 workers")
}

/// Every Monte Carlo acceptance criterion, in order.
pub fn acceptance_criteria() -> Vec<CheckOutcome> {
    vec![
        norm_oracle_equivalence(ORACLE_INSTANCES),
        permutation_inequality(PERMUTATION_ENSEMBLES),
        moment_constants(),
        moment_bound_white_noise(),
        clt_convergence(),
        tail_shape(),
        dependent_variants(),
        reproducibility(),
    ]
}

/// Analytic checks that need no simulation beyond a few draws.
pub fn quick_checks() -> Vec<CheckOutcome> {
    let mut out = vec![norm_oracle_equivalence(100), permutation_inequality(500), moment_constants()];

    let f = f_1234();
    let p22 = Exponents::new(vec![2.0, 2.0]).unwrap();
    let factor = Field::from_flat(counting_grid(&[2, 2]), vec![1.0, 1.0, 2.0, 2.0]).unwrap();
    let p11 = Exponents::new(vec![1.0, 1.0]).unwrap();
    out.push(CheckOutcome::new(
        "factorized field norm",
        rel_close(mixed_norm(&factor, &p11).unwrap(), 6.0, 1e-12),
        "|g1 (x) g2|_(1,1) = |g1|_1 |g2|_1 = 6",
    ));

    let swapped = {
        let e = Ensemble::new(vec![f.clone()]).unwrap();
        crate::grid::ordered_mixed_norm(
            &e,
            &[NormAxis::Spatial(1), NormAxis::Spatial(0), NormAxis::Replica],
            &[1.0, 2.0, 1.0],
        )
        .unwrap()
    };
    out.push(CheckOutcome::new(
        "axis order distinguishes (1,2) norms",
        rel_close(swapped, 58f64.sqrt(), 1e-12) && !rel_close(swapped, 52f64.sqrt(), 1e-6),
        format!("reversed order gives {swapped:.6} = sqrt(58), not sqrt(52)"),
    ));

    let line = counting_grid(&[2]);
    let dd = Operator::divided_difference(line.clone(), 0).unwrap();
    let diff = apply_operator(&dd, &Field::from_flat(line, vec![1.0, 3.0]).unwrap()).unwrap();
    let two = Operator::scaled_identity(counting_grid(&[2, 2]), 2.0);
    let sob = sobolev_norm(&f, &two, &p22, &p22).unwrap();
    out.push(CheckOutcome::new(
        "operators",
        diff.to_flat() == vec![2.0] && rel_close(sob, 2.0 * 30f64.sqrt(), 1e-12),
        format!("divided difference {:?}, sobolev norm with 2I {sob:.6}", diff.to_flat()),
    ));

    let geo = MixingSchedule::from_fn(|k| 0.5f64.powi(k as i32), 10_000)
        .with_tail(TailCertificate::GeometricMajorant { constant: 1.0, ratio: 0.5 });
    let km = mixingale_coefficient(2.0, &geo, 1e-12).unwrap_or(f64::NAN);
    out.push(CheckOutcome::new("geometric mixingale series", (km - 2.0).abs() < 1e-12, format!("K_M(2) = {km}")));

    let ks = (
        ks_two_sample(&[1.0, 2.0], &[1.0, 3.0]).unwrap(),
        ks_two_sample(&[1.0], &[2.0]).unwrap(),
        ks_two_sample(&[0.5, 0.1], &[0.5, 0.1]).unwrap(),
    );
    out.push(CheckOutcome::new("two-sample KS", ks == (0.5, 1.0, 0.0), format!("{ks:?}")));

    let sums = normed_sum(&vec![f.clone(); 4]).map(|s| s == f.scaled(2.0)).unwrap_or(false)
        && normed_sum(&[f.clone(), f.scaled(-1.0)]).map(|s| s.is_zero()).unwrap_or(false);
    out.push(CheckOutcome::new("normed sums", sums, "4 copies give 2f, f and -f cancel"));

    let single = RandomFieldModel::white_noise(Field::constant(counting_grid(&[1]), 1.0), Driver::Gaussian).unwrap();
    let g4 = pointwise_abs_moment(&single, 4.0).map(|f| f.to_flat()[0]).unwrap_or(f64::NAN);
    out.push(CheckOutcome::new(
        "Gaussian fourth moment",
        rel_close(g4, 3f64.powf(0.25), 1e-12),
        format!("(E|N(0,1)|^4)^(1/4) = {g4}"),
    ));

    let rhs = moment_bound_rhs(&white_noise_config(&[2, 2], Driver::Gaussian, &[2.0, 2.0], 2.0, &[4], 100, 1))
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
    let rad = moment_bound_rhs(&white_noise_config(&[1], Driver::Rademacher, &[2.0], 1.0, &[4], 100, 1))
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
    let k2 = rosenthal_bound(RosenthalQuery::new(2.0)).unwrap();
    out.push(CheckOutcome::new(
        "moment bound right-hand sides",
        rel_close(rhs, GAUSSIAN_2X2_RHS, 1e-12) && rel_close(rad, k2, 1e-12),
        format!("gaussian 2x2 rhs {rhs:.7}, rademacher single cell {rad:.7}"),
    ));
    out
}

/// Quick checks followed by the acceptance criteria.
pub fn full_checks() -> Vec<CheckOutcome> {
    let mut out = quick_checks();
    out.extend(acceptance_criteria());
    out
}
