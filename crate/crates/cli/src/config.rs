//! Experiment configuration files.
//!
//! Files use TOML syntax. Every table rejects keys it does not know, and
//! every value error names the key it came from.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use dynprice_core::optimize::DEFAULT_GRID_POINTS;
use dynprice_core::sim::DEFAULT_REPLICATIONS;
use dynprice_core::{DemandModel, GridConfig, Interval, MonteCarloConfig, PolicySpec, Scenario};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_HORIZON: usize = 1000;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: RawScenario,
    #[serde(default)]
    policies: Vec<PolicySpec>,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    output: Output,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    models: Vec<RawModel>,
    interval: RawInterval,
    #[serde(default)]
    true_model: Option<RawTrueModel>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: ModelKind,
    params: toml::Value,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ModelKind {
    Linear,
    Logistic,
    Tabulated,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInterval {
    l: f64,
    u: f64,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawTrueModel {
    Index(i64),
    Word(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    horizon: Option<i64>,
    replications: Option<i64>,
    base_seed: Option<u64>,
    checkpoints: Option<Vec<i64>>,
    workers: Option<i64>,
    grid_points: Option<i64>,
}

/// Where results go. Relative paths resolve against the working directory.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub csv: Option<PathBuf>,
    pub bounds: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrueModels {
    All,
    One(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub horizon: usize,
    pub replications: usize,
    pub base_seed: u64,
    /// Empty means the default thinning.
    pub checkpoints: Vec<usize>,
    pub workers: usize,
    pub grid_points: usize,
}

/// A parsed and validated experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub true_models: TrueModels,
    pub policies: Vec<PolicySpec>,
    pub run: RunSettings,
    pub output: Output,
}

/// A config value that failed validation.
#[derive(Debug)]
pub struct Invalid {
    pub key: String,
    pub value: String,
    pub reason: String,
}

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}: {}", self.key, self.value, self.reason)
    }
}

fn invalid(key: impl Into<String>, value: impl fmt::Display, reason: impl Into<String>) -> CliError {
    CliError::Invalid(Invalid {
        key: key.into(),
        value: value.to_string(),
        reason: reason.into(),
    })
}

fn positive(key: &str, value: Option<i64>, default: usize) -> Result<usize, CliError> {
    match value {
        None => Ok(default),
        Some(v) if v >= 1 => Ok(v as usize),
        Some(v) => Err(invalid(key, v, "must be at least 1")),
    }
}

fn number_list(key: &str, value: &toml::Value) -> Result<Vec<f64>, CliError> {
    let items = value
        .as_array()
        .ok_or_else(|| invalid(key, value, "expected an array of numbers"))?;
    items
        .iter()
        .map(|v| match v {
            toml::Value::Float(x) => Ok(*x),
            toml::Value::Integer(i) => Ok(*i as f64),
            other => Err(invalid(key, other, "expected a number")),
        })
        .collect()
}

fn build_model(index: usize, raw: &RawModel) -> Result<DemandModel, CliError> {
    let key = format!("scenario.models[{index}].params");
    let pair = |what: &str| -> Result<(f64, f64), CliError> {
        let xs = number_list(&key, &raw.params)?;
        match xs[..] {
            [a, b] if a.is_finite() && b.is_finite() => Ok((a, b)),
            [_, _] => Err(invalid(&key, &raw.params, "parameters must be finite")),
            _ => Err(invalid(&key, &raw.params, format!("expected two numbers ({what})"))),
        }
    };
    match raw.kind {
        ModelKind::Linear => pair("intercept, slope").map(|(a, b)| DemandModel::linear(a, b)),
        ModelKind::Logistic => pair("c0, c1").map(|(c0, c1)| DemandModel::logistic(c0, c1)),
        ModelKind::Tabulated => {
            let rows = raw
                .params
                .as_array()
                .ok_or_else(|| invalid(&key, &raw.params, "expected an array of [price, probability] pairs"))?;
            let mut knots = Vec::with_capacity(rows.len());
            for (j, row) in rows.iter().enumerate() {
                let xs = number_list(&format!("{key}[{j}]"), row)?;
                match xs[..] {
                    [p, q] => knots.push((p, q)),
                    _ => return Err(invalid(format!("{key}[{j}]"), row, "expected [price, probability]")),
                }
            }
            DemandModel::tabulated(knots).map_err(|e| invalid(&key, &raw.params, e.to_string()))
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        Self::validate(raw)
    }

    fn validate(raw: RawConfig) -> Result<Self, CliError> {
        let run = &raw.run;
        let grid_points = positive("run.grid_points", run.grid_points, DEFAULT_GRID_POINTS)?;
        if grid_points < 3 {
            return Err(invalid("run.grid_points", grid_points, "must be at least 3"));
        }
        let horizon = positive("run.horizon", run.horizon, DEFAULT_HORIZON)?;
        let replications = positive("run.replications", run.replications, DEFAULT_REPLICATIONS)?;
        let workers = match run.workers {
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
            Some(_) => positive("run.workers", run.workers, 1)?,
        };
        let mut checkpoints = Vec::new();
        for (i, &t) in run.checkpoints.iter().flatten().enumerate() {
            if t < 1 || t as u64 > horizon as u64 {
                return Err(invalid(
                    format!("run.checkpoints[{i}]"),
                    t,
                    format!("must lie in [1, run.horizon = {horizon}]"),
                ));
            }
            checkpoints.push(t as usize);
        }

        let sc = &raw.scenario;
        let interval = Interval::new(sc.interval.l, sc.interval.u).map_err(|_| {
            invalid(
                "scenario.interval",
                format!("{{ l = {}, u = {} }}", sc.interval.l, sc.interval.u),
                "need finite l < u",
            )
        })?;
        if sc.models.len() < 2 {
            return Err(invalid("scenario.models", sc.models.len(), "need at least two models"));
        }
        let models = sc
            .models
            .iter()
            .enumerate()
            .map(|(i, m)| build_model(i, m))
            .collect::<Result<Vec<_>, _>>()?;
        let n = models.len();
        let true_models = match &sc.true_model {
            None => TrueModels::All,
            Some(RawTrueModel::Word(w)) if w == "all" => TrueModels::All,
            Some(RawTrueModel::Word(w)) => {
                return Err(invalid("scenario.true_model", format!("{w:?}"), "expected an index or \"all\""))
            }
            Some(RawTrueModel::Index(i)) if *i >= 0 && (*i as u64) < n as u64 => TrueModels::One(*i as usize),
            Some(RawTrueModel::Index(i)) => {
                return Err(invalid("scenario.true_model", i, format!("out of range for {n} models")))
            }
        };
        let scenario = Scenario::new(models, interval, GridConfig::with_points(grid_points))
            .map_err(|e| invalid("scenario", "", e.to_string()))?;

        for (i, spec) in raw.policies.iter().enumerate() {
            spec.check()
                .map_err(|e| invalid(format!("policies[{i}]"), format!("{{ kind = {} }}", spec.kind), e.to_string()))?;
        }

        Ok(ExperimentConfig {
            scenario,
            true_models,
            policies: raw.policies,
            run: RunSettings {
                horizon,
                replications,
                base_seed: run.base_seed.unwrap_or(0),
                checkpoints,
                workers,
                grid_points,
            },
            output: raw.output,
        })
    }

    pub fn true_model_indices(&self) -> Vec<usize> {
        match self.true_models {
            TrueModels::All => (0..self.scenario.n_models()).collect(),
            TrueModels::One(i) => vec![i],
        }
    }

    pub fn monte_carlo(&self) -> MonteCarloConfig {
        let mut mc = MonteCarloConfig::new(self.run.horizon, self.run.replications, self.run.base_seed);
        mc.workers = self.run.workers;
        mc.checkpoints = self.run.checkpoints.clone();
        mc.true_models = self.true_model_indices();
        mc
    }
}
