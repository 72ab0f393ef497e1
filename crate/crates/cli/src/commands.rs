use std::fmt::Write;

use mixnorm::constants::{mixingale_coefficient, rosenthal_bound, RosenthalQuery};
use mixnorm::grid::{check_permutation_inequality, mixed_norm, GridError};
use mixnorm::lab::{check_moment_bound, check_sobolev_bound, clt_convergence_test, convergence_csv, tail_probe, TailProbe};
use mixnorm::models::TemporalMode;
use mixnorm::Ensemble;

use crate::config::ConfigDocument;
use crate::error::CliError;

/// One file to write into the output directory.
pub struct Output {
    pub name: &'static str,
    pub contents: String,
}

/// Files produced by a subcommand and a one-line summary for the terminal.
pub struct CommandResult {
    pub outputs: Vec<Output>,
    pub summary: String,
}

const MIXINGALE_TOL: f64 = 1e-12;

pub fn norm(doc: &ConfigDocument) -> Result<CommandResult, CliError> {
    let id = doc.experiment_id()?;
    let grid = doc.build_grid()?;
    let p = doc.build_exponents()?;
    let (fields, r) = doc.build_fields(&grid)?;
    let mut csv = String::from("experiment_id,replica,norm\n");
    for (i, f) in fields.iter().enumerate() {
        let v = mixed_norm(f, &p).map_err(|e| CliError::validation("exponents.p", e))?;
        writeln!(csv, "{id},{i},{v}").unwrap();
    }
    let mut outputs = vec![Output { name: "norm.csv", contents: csv }];
    let mut summary = format!("{} field norm(s)", fields.len());
    if let Some(r) = r {
        let ensemble = Ensemble::new(fields).map_err(|e| CliError::validation("field.replicas", e))?;
        let check = check_permutation_inequality(&ensemble, &p, r).map_err(|e| match e {
            GridError::ExponentTooSmall { .. } | GridError::InvalidExponent { .. } => CliError::validation("field.r", e),
            other => CliError::runtime(other),
        })?;
        outputs.push(Output {
            name: "permutation.csv",
            contents: format!("experiment_id,r,lhs,rhs,holds\n{id},{r},{},{},{}\n", check.lhs, check.rhs, check.holds),
        });
        write!(summary, ", permutation inequality holds = {}", check.holds).unwrap();
    }
    Ok(CommandResult { outputs, summary })
}

pub fn constants(doc: &ConfigDocument) -> Result<CommandResult, CliError> {
    let (ps, ms, beta) = doc.build_constants()?;
    let mut outputs = Vec::new();
    if !ps.is_empty() {
        let mut csv = String::from("p,k_r,k_r_symmetric\n");
        for (i, &p) in ps.iter().enumerate() {
            let field = format!("constants.p[{i}]");
            let k = rosenthal_bound(RosenthalQuery::new(p)).map_err(|e| CliError::validation(&field, e))?;
            let ks = rosenthal_bound(RosenthalQuery::symmetric(p)).map_err(|e| CliError::validation(&field, e))?;
            writeln!(csv, "{p},{k},{ks}").unwrap();
        }
        outputs.push(Output { name: "rosenthal.csv", contents: csv });
    }
    if !ms.is_empty() {
        let mut csv = String::from("m,k_m\n");
        for (i, &m) in ms.iter().enumerate() {
            let k = mixingale_coefficient(m, &beta, MIXINGALE_TOL)
                .map_err(|e| CliError::validation(&format!("constants.m[{i}]"), e))?;
            writeln!(csv, "{m},{k}").unwrap();
        }
        outputs.push(Output { name: "mixingale.csv", contents: csv });
    }
    let summary = format!("{} Rosenthal and {} mixingale constants", ps.len(), ms.len());
    Ok(CommandResult { outputs, summary })
}

pub fn moments(doc: &ConfigDocument) -> Result<CommandResult, CliError> {
    let id = doc.experiment_id()?;
    let cfg = doc.build_experiment()?;
    let report = check_moment_bound(&cfg).map_err(CliError::runtime)?;
    let summary = format!("{}: holds for every n = {}", report.theorem, report.all_hold());
    Ok(CommandResult { outputs: vec![Output { name: "moments.csv", contents: report.to_csv(id) }], summary })
}

pub fn sobolev(doc: &ConfigDocument) -> Result<CommandResult, CliError> {
    let id = doc.experiment_id()?;
    let cfg = doc.build_experiment()?;
    if cfg.operator.is_none() {
        return Err(CliError::validation("operator", "missing"));
    }
    let report = check_sobolev_bound(&cfg).map_err(CliError::runtime)?;
    let summary = format!("{}: holds for every n = {}", report.theorem, report.all_hold());
    Ok(CommandResult { outputs: vec![Output { name: "sobolev.csv", contents: report.to_csv(id) }], summary })
}

pub fn clt(doc: &ConfigDocument) -> Result<CommandResult, CliError> {
    let id = doc.experiment_id()?;
    let cfg = doc.build_experiment()?;
    if matches!(cfg.model.temporal(), TemporalMode::MartingaleDifference(_)) {
        return Err(CliError::validation(
            "model.temporal",
            "the Gaussian limit needs a closed-form long-run covariance, unavailable for martingale differences",
        ));
    }
    let rows = clt_convergence_test(&cfg).map_err(CliError::runtime)?;
    let summary = rows
        .iter()
        .map(|r| format!("n={} ks={:.4}", r.n, r.ks_distance))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(CommandResult { outputs: vec![Output { name: "convergence.csv", contents: convergence_csv(id, &rows) }], summary })
}

pub fn tails(doc: &ConfigDocument) -> Result<CommandResult, CliError> {
    let id = doc.experiment_id()?;
    let cfg = doc.build_experiment()?;
    if cfg.tail.is_none() {
        return Err(CliError::validation("tail", "missing"));
    }
    let mut csv = format!("{}\n", TailProbe::CSV_HEADER);
    let mut dominated = true;
    for &n in &cfg.n_schedule {
        let probe = tail_probe(&cfg, n).map_err(CliError::runtime)?;
        dominated &= probe.dominated;
        csv.push_str(&probe.csv_rows(id));
    }
    let summary = format!("empirical tail below the fitted curve at every n = {dominated}");
    Ok(CommandResult { outputs: vec![Output { name: "tails.csv", contents: csv }], summary })
}
