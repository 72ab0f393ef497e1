//! TOML experiment documents.
//!
//! Every section is optional at the serde level so that a missing entry is
//! reported as a validation error with its field path rather than as a parse
//! error. Unknown keys are parse errors.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use mixnorm::constants::MixingSchedule;
use mixnorm::grid::{Axis, ProductGrid};
use mixnorm::lab::{ExperimentConfig, TailSpec};
use mixnorm::models::{
    CovarianceMatrix, Driver, MartingaleSpec, MovingAverageSpec, RandomFieldModel, SeedSpec, SpatialMode,
    TemporalMode,
};
use mixnorm::{Exponents, Field, Grid, Operator};

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponents: Option<ExponentsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub axes: Vec<AxisSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub label: String,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
}

/// Fields for the `norm` subcommand: one field or an ensemble of replicas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<Vec<Vec<f64>>>,
    /// Replica exponent for the permutation check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

/// A moment order: a number, or the string `"e"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Order {
    Value(f64),
    Named(String),
}

impl Order {
    fn resolve(&self, path: &str) -> Result<f64, CliError> {
        match self {
            Order::Value(v) => Ok(*v),
            Order::Named(s) if s == "e" => Ok(std::f64::consts::E),
            Order::Named(s) => Err(CliError::validation(path, format!("expected a number or \"e\", got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub p: Vec<Order>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m: Vec<Order>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriverSection {
    Gaussian,
    Rademacher,
    CenteredExponential,
    SymmetricWeibull { shape: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TemporalSection {
    Iid,
    MartingaleDifference { feedback: f64, cap: f64, burn_in: usize },
    MDependent { coefficients: Vec<f64>, beta_cap: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub driver: Option<DriverSection>,
    /// Row-major envelope, one entry per cell.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<Vec<f64>>,
    /// Spatial correlation matrix; white noise when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temporal: Option<TemporalSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_schedule: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stream: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSection {
    Identity,
    ScaledIdentity { factor: f64 },
    DividedDifference { axis: usize },
    /// Square matrix acting on the model grid, rows and columns in
    /// row-major cell order.
    Matrix { rows: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSection {
    pub q1: f64,
    #[serde(default)]
    pub q2: f64,
    pub thresholds: Vec<f64>,
}

pub fn parse(text: &str) -> Result<ConfigDocument, CliError> {
    toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

/// Deterministic serialization of a parsed document.
pub fn canonicalize(doc: &ConfigDocument) -> String {
    toml::to_string(doc).expect("config documents always serialize")
}

fn required<'a, T>(value: &'a Option<T>, path: &str) -> Result<&'a T, CliError> {
    value.as_ref().ok_or_else(|| CliError::validation(path, "missing"))
}

impl ConfigDocument {
    pub fn experiment_id(&self) -> Result<&str, CliError> {
        let id = required(&self.experiment_id, "experiment_id")?;
        if id.is_empty() || id.contains([',', '\n', '"']) {
            return Err(CliError::validation("experiment_id", "must be non-empty without commas, quotes or newlines"));
        }
        Ok(id)
    }

    pub fn override_seed(&mut self, seed: u64) {
        if let Some(exp) = self.experiment.as_mut() {
            exp.seed = Some(seed);
        }
    }

    pub fn seed(&self) -> Option<u64> {
        self.experiment.as_ref().and_then(|e| e.seed)
    }

    pub fn build_grid(&self) -> Result<Arc<Grid>, CliError> {
        let section = required(&self.grid, "grid")?;
        let mut axes = Vec::with_capacity(section.axes.len());
        for (k, a) in section.axes.iter().enumerate() {
            let axis = Axis::new(a.label.clone(), a.points.clone(), a.weights.clone())
                .map_err(|e| CliError::validation(&format!("grid.axes[{k}]"), e))?;
            axes.push(axis);
        }
        ProductGrid::shared(axes).map_err(|e| CliError::validation("grid.axes", e))
    }

    pub fn build_exponents(&self) -> Result<Exponents, CliError> {
        let p = required(&self.exponents, "exponents").and_then(|e| required(&e.p, "exponents.p"))?;
        Exponents::new(p.clone()).map_err(|e| CliError::validation("exponents.p", e))
    }

    /// The fields of the `norm` subcommand and the optional replica exponent.
    pub fn build_fields(&self, grid: &Arc<Grid>) -> Result<(Vec<Field>, Option<f64>), CliError> {
        let section = required(&self.field, "field")?;
        let rows: Vec<(String, &Vec<f64>)> = match (&section.values, &section.replicas) {
            (Some(v), None) => vec![("field.values".into(), v)],
            (None, Some(r)) if !r.is_empty() => {
                r.iter().enumerate().map(|(i, v)| (format!("field.replicas[{i}]"), v)).collect()
            }
            (None, Some(_)) => return Err(CliError::validation("field.replicas", "needs at least one replica")),
            (Some(_), Some(_)) => return Err(CliError::validation("field", "give either `values` or `replicas`")),
            (None, None) => return Err(CliError::validation("field.values", "missing")),
        };
        let fields = rows
            .into_iter()
            .map(|(path, v)| Field::from_flat(grid.clone(), v.clone()).map_err(|e| CliError::validation(&path, e)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((fields, section.r))
    }

    /// `(p list, m list, β)` of the `constants` subcommand.
    pub fn build_constants(&self) -> Result<(Vec<f64>, Vec<f64>, MixingSchedule), CliError> {
        let section = required(&self.constants, "constants")?;
        if section.p.is_empty() && section.m.is_empty() {
            return Err(CliError::validation("constants.p", "give `p` and/or `m` with `beta`"));
        }
        let resolve = |list: &[Order], name: &str| {
            list.iter().enumerate().map(|(i, o)| o.resolve(&format!("constants.{name}[{i}]"))).collect::<Result<Vec<_>, _>>()
        };
        let p = resolve(&section.p, "p")?;
        let m = resolve(&section.m, "m")?;
        if !m.is_empty() && section.beta.is_empty() {
            return Err(CliError::validation("constants.beta", "missing"));
        }
        Ok((p, m, MixingSchedule::finite(section.beta.clone())))
    }

    pub fn build_model(&self, grid: &Arc<Grid>) -> Result<RandomFieldModel, CliError> {
        let section = required(&self.model, "model")?;
        let driver = match required(&section.driver, "model.driver")? {
            DriverSection::Gaussian => Driver::Gaussian,
            DriverSection::Rademacher => Driver::Rademacher,
            DriverSection::CenteredExponential => Driver::CenteredExponential,
            DriverSection::SymmetricWeibull { shape } => Driver::SymmetricWeibull { shape: *shape },
        };
        let envelope = required(&section.envelope, "model.envelope")?;
        let envelope =
            Field::from_flat(grid.clone(), envelope.clone()).map_err(|e| CliError::validation("model.envelope", e))?;
        let spatial = match &section.correlation {
            None => SpatialMode::WhiteNoise,
            Some(rows) => SpatialMode::Correlated(
                CovarianceMatrix::from_rows(rows).map_err(|e| CliError::validation("model.correlation", e))?,
            ),
        };
        let temporal = match required(&section.temporal, "model.temporal")? {
            TemporalSection::Iid => TemporalMode::Iid,
            TemporalSection::MartingaleDifference { feedback, cap, burn_in } => {
                TemporalMode::MartingaleDifference(MartingaleSpec { feedback: *feedback, cap: *cap, burn_in: *burn_in })
            }
            TemporalSection::MDependent { coefficients, beta_cap } => {
                TemporalMode::MDependent(MovingAverageSpec { coefficients: coefficients.clone(), beta_cap: *beta_cap })
            }
        };
        RandomFieldModel::new(envelope, driver, spatial, temporal).map_err(CliError::from_model)
    }

    fn build_operator(&self, grid: &Arc<Grid>) -> Result<Option<Operator>, CliError> {
        let Some(section) = &self.operator else { return Ok(None) };
        let op = match section {
            OperatorSection::Identity => Operator::identity(grid.clone()),
            OperatorSection::ScaledIdentity { factor } => Operator::scaled_identity(grid.clone(), *factor),
            OperatorSection::DividedDifference { axis } => Operator::divided_difference(grid.clone(), *axis)
                .map_err(|e| CliError::validation("operator.axis", e))?,
            OperatorSection::Matrix { rows } => Operator::from_rows(grid.clone(), grid.clone(), rows)
                .map_err(|e| CliError::validation("operator.rows", e))?,
        };
        Ok(Some(op))
    }

    /// The full Monte Carlo experiment.
    pub fn build_experiment(&self) -> Result<ExperimentConfig, CliError> {
        let grid = self.build_grid()?;
        let p = self.build_exponents()?;
        let model = self.build_model(&grid)?;
        let section = required(&self.experiment, "experiment")?;
        let m = *required(&section.m, "experiment.m")?;
        let n_schedule = required(&section.n_schedule, "experiment.n_schedule")?.clone();
        let replicas = *required(&section.replicas, "experiment.replicas")?;
        let seed = *required(&section.seed, "experiment.seed")?;
        let mut cfg =
            ExperimentConfig::new(model, p, m, n_schedule, replicas, SeedSpec::new(seed, section.stream.unwrap_or(0)));
        if let Some(op) = self.build_operator(&grid)? {
            cfg = cfg.with_operator(op);
        }
        if let Some(t) = &self.tail {
            cfg = cfg.with_tail(TailSpec { q1: t.q1, q2: t.q2, thresholds: t.thresholds.clone() });
        }
        cfg.validate().map_err(CliError::from_lab)?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MOMENTS: &str = include_str!("../../../configs/moments.toml");

    #[test]
    fn canonical_form_is_idempotent() {
        for text in [
            MOMENTS,
            include_str!("../../../configs/norm.toml"),
            include_str!("../../../configs/constants.toml"),
            include_str!("../../../configs/clt.toml"),
            include_str!("../../../configs/tails.toml"),
            include_str!("../../../configs/sobolev.toml"),
            include_str!("../../../configs/martingale.toml"),
            include_str!("../../../configs/mixingale.toml"),
        ] {
            let once = canonicalize(&parse(text).unwrap());
            let twice = canonicalize(&parse(&once).unwrap());
            assert_eq!(once, twice);
            assert_eq!(parse(&once).unwrap(), parse(text).unwrap());
        }
    }

    #[test]
    fn formatting_does_not_change_the_canonical_form() {
        let doc = parse(MOMENTS).unwrap();
        let reformatted = format!("# a comment\n\n{}", canonicalize(&doc).replace(" = ", "="));
        assert_eq!(canonicalize(&parse(&reformatted).unwrap()), canonicalize(&doc));
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let text = MOMENTS.replace("replicas =", "replicates =");
        assert!(matches!(parse(&text), Err(CliError::Parse(_))));
        let text = MOMENTS.replace("[experiment]", "[experiment]\ncolour = 1");
        assert!(matches!(parse(&text), Err(CliError::Parse(_))));
    }

    #[test]
    fn missing_exponents_name_the_field() {
        let text = MOMENTS.replace("p = [2.0, 2.0]", "");
        let err = parse(&text).unwrap().build_experiment().unwrap_err();
        assert!(matches!(&err, CliError::Validation { field, .. } if field == "exponents.p"), "{err}");
    }

    #[test]
    fn moments_example_builds() {
        let cfg = parse(MOMENTS).unwrap().build_experiment().unwrap();
        assert_eq!(cfg.n_schedule, vec![4, 64, 256]);
        assert_eq!(cfg.replicas, 5000);
    }

    #[test]
    fn e_is_accepted_as_an_order() {
        let doc = parse("[constants]\np = [2.0, \"e\", 4]\n").unwrap();
        let (p, _, _) = doc.build_constants().unwrap();
        assert_eq!(p, vec![2.0, std::f64::consts::E, 4.0]);
        let doc = parse("[constants]\np = [\"pi\"]\n").unwrap();
        assert!(matches!(doc.build_constants(), Err(CliError::Validation { .. })));
    }
}
