use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_mixnorm");
const CONFIGS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");

fn config(name: &str) -> String {
    fs::read_to_string(Path::new(CONFIGS).join(name)).unwrap()
}

/// A small version of the moments example.
fn small_moments() -> String {
    config("moments.toml").replace("replicas = 5000", "replicas = 400").replace("[4, 64, 256]", "[4, 16]")
}

fn run(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("MIXNORM_WORKERS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn run_config(sub: &str, text: &str, extra: &[&str]) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.in.toml");
    fs::write(&cfg, text).unwrap();
    let out = dir.path().join("out");
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (run(&args, &[]), dir)
}

fn read_out(dir: &tempfile::TempDir, name: &str) -> String {
    fs::read_to_string(dir.path().join("out").join(name)).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn constants_table() {
    let (o, dir) = run_config("constants", &config("constants.toml"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = read_out(&dir, "rosenthal.csv");
    let k: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(k.len(), 3);
    assert!((k[0] - 1.885_584).abs() < 1e-6);
    assert_eq!(k[1], 1.77638);
    assert!((k[2] - 1.885_584).abs() < 1e-6);
    assert!(read_out(&dir, "mixingale.csv").contains("2,2.8284271247461903"));
}

#[test]
fn moments_report_and_manifest() {
    let (o, dir) = run_config("moments", &small_moments(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = read_out(&dir, "moments.csv");
    assert!(csv.starts_with("experiment_id,theorem,n,lhs,stderr,ci_upper,rhs,holds,margin_ratio\n"));
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let rhs: f64 = cols[6].parse().unwrap();
        assert!((rhs - 4.963_136_697_345_818).abs() < 1e-11);
        assert_eq!(cols[7], "true");
    }
    let manifest: serde_json::Value = serde_json::from_str(&read_out(&dir, "manifest.json")).unwrap();
    assert_eq!(manifest["experiment_id"], "gaussian_2x2");
    assert_eq!(manifest["master_seed"], 20240601);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["outputs"], serde_json::json!(["config.toml", "moments.csv"]));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let text = small_moments();
    let (a, da) = run_config("moments", &text, &["--workers", "1"]);
    let (b, db) = run_config("moments", &text, &["--workers", "4"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(read_out(&da, "moments.csv"), read_out(&db, "moments.csv"));

    let clt = config("clt.toml").replace("replicas = 2000", "replicas = 300");
    let (a, da) = run_config("clt", &clt, &["--workers", "1"]);
    let (b, db) = run_config("clt", &clt, &["--workers", "3"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(read_out(&da, "convergence.csv"), read_out(&db, "convergence.csv"));

    let ma: serde_json::Value = serde_json::from_str(&read_out(&da, "manifest.json")).unwrap();
    let mb: serde_json::Value = serde_json::from_str(&read_out(&db, "manifest.json")).unwrap();
    assert_eq!(ma["config_sha256"], mb["config_sha256"]);
}

#[test]
fn worker_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, small_moments()).unwrap();
    let out = dir.path().join("out");
    let args = ["moments", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    assert!(run(&args, &[("MIXNORM_WORKERS", "2")]).status.success());
    assert_eq!(run(&args, &[("MIXNORM_WORKERS", "0")]).status.code(), Some(3));
}

#[test]
fn seed_override_changes_results_and_hash() {
    let text = small_moments();
    let (_, da) = run_config("moments", &text, &[]);
    let (o, db) = run_config("moments", &text, &["--seed-override", "7"]);
    assert!(o.status.success());
    assert_ne!(read_out(&da, "moments.csv"), read_out(&db, "moments.csv"));
    assert!(read_out(&db, "config.toml").contains("seed = 7"));
    let m: serde_json::Value = serde_json::from_str(&read_out(&db, "manifest.json")).unwrap();
    assert_eq!(m["master_seed"], 7);
}

#[test]
fn canonical_config_reproduces_the_run() {
    let (_, first) = run_config("moments", &small_moments(), &[]);
    let (o, second) = run_config("moments", &read_out(&first, "config.toml"), &[]);
    assert!(o.status.success());
    assert_eq!(read_out(&first, "moments.csv"), read_out(&second, "moments.csv"));
    assert_eq!(read_out(&first, "config.toml"), read_out(&second, "config.toml"));
}

#[test]
fn parse_errors_exit_2() {
    let (o, _) = run_config("moments", "experiment_id = \"x\"\n[grid\n", &[]);
    assert_eq!(o.status.code(), Some(2));
    let (o, _) = run_config("moments", &small_moments().replace("seed =", "sead ="), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sead"), "{}", stderr(&o));
}

#[test]
fn validation_errors_exit_3_with_field_path() {
    let cases = [
        (small_moments().replace("p = [2.0, 2.0]", ""), "exponents.p"),
        (small_moments().replace("seed = 20240601", ""), "experiment.seed"),
        (small_moments().replace("replicas = 400", "replicas = 5"), "experiment.replicas"),
        (small_moments().replace("envelope = [1.0, 1.0, 1.0, 1.0]", "envelope = [1.0, -1.0, 1.0, 1.0]"), "model.envelope"),
        (small_moments().replace("p = [2.0, 2.0]", "p = [1.5, 1.5]"), "exponents.p"),
    ];
    for (text, field) in cases {
        let (o, _) = run_config("moments", &text, &[]);
        assert_eq!(o.status.code(), Some(3), "{field}: {}", stderr(&o));
        assert!(stderr(&o).contains(&format!("`{field}`")), "{field}: {}", stderr(&o));
    }
    let (o, _) = run_config("sobolev", &small_moments(), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("`operator`"));
    let (o, _) = run_config("clt", &config("martingale.toml"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("`model.temporal`"));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, small_moments()).unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = run(&["moments", "--config", cfg.to_str().unwrap(), "--out", blocker.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["moments", "--config", "/nonexistent/c.toml", "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn norm_subcommand() {
    let (o, dir) = run_config("norm", &config("norm.toml"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = read_out(&dir, "norm.csv");
    let first: f64 = csv.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((first - 52f64.sqrt()).abs() < 1e-12);
    assert!(read_out(&dir, "permutation.csv").lines().nth(1).unwrap().ends_with(",true"));
}

#[test]
fn selftest_quick_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["selftest", "--level", "quick", "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = fs::read_to_string(dir.path().join("selftest_quick.txt")).unwrap();
    assert!(report.lines().all(|l| l.starts_with("[PASS]")));
}
