use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelParams, OfferScan, DEFAULT_MAX_STEPS};
use crate::graphgen::TopologyConfig;
use crate::strategies::{StrategyParams, StrategyRegistry, DEFAULT_ETA};
use crate::{Error, Result};

fn default_threshold() -> f64 {
    1.0
}
fn default_capacity() -> f64 {
    2.0
}
fn default_strategy() -> String {
    "random".to_owned()
}
fn default_eta() -> f64 {
    DEFAULT_ETA
}
fn default_money() -> f64 {
    1.0
}
fn default_max_steps() -> u64 {
    DEFAULT_MAX_STEPS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "R", default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_capacity")]
    pub beta: f64,
    #[serde(default = "default_strategy")]
    pub strategy: String,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub offer_scan: OfferScan,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            threshold: default_threshold(),
            beta: default_capacity(),
            strategy: default_strategy(),
            eta: default_eta(),
            offer_scan: OfferScan::Skip,
        }
    }
}

impl ModelConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            threshold: self.threshold,
            capacity: self.beta,
            offer_scan: self.offer_scan,
        }
    }

    pub fn strategy_params(&self) -> StrategyParams {
        StrategyParams { eta: self.eta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoneyConfig {
    #[serde(rename = "M", default = "default_money")]
    pub mean: f64,
    #[serde(default)]
    pub theta: f64,
}

impl Default for MoneyConfig {
    fn default() -> Self {
        MoneyConfig {
            mean: default_money(),
            theta: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub realizations: usize,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    #[serde(default)]
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "M")]
    Money,
    #[serde(rename = "theta")]
    Theta,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Money => "M",
            SweepParam::Theta => "theta",
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" => Ok(SweepParam::Money),
            "theta" => Ok(SweepParam::Theta),
            other => Err(Error::Validation(vec![format!(
                "unknown sweep parameter `{other}` (expected `M` or `theta`)"
            )])),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_degree: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lowhigh: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
}

impl OutputPaths {
    fn iter(&self) -> impl Iterator<Item = (&'static str, &PathBuf)> {
        [
            ("outputs.summary", &self.summary),
            ("outputs.per_degree", &self.per_degree),
            ("outputs.lowhigh", &self.lowhigh),
            ("outputs.trace", &self.trace),
        ]
        .into_iter()
        .filter_map(|(name, p)| p.as_ref().map(|p| (name, p)))
    }
}

/// A full experiment: substrate, model, money, ensemble size and outputs.
///
/// Either `topology` (a fresh graph per realization) or `graph_file` (one
/// fixed graph for every realization) must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph_file: Option<PathBuf>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub money: MoneyConfig,
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub outputs: OutputPaths,
}

impl ExperimentConfig {
    pub fn new(topology: TopologyConfig, realizations: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            topology: Some(topology),
            graph_file: None,
            model: ModelConfig::default(),
            money: MoneyConfig::default(),
            run: RunConfig {
                realizations,
                max_steps: DEFAULT_MAX_STEPS,
                master_seed,
            },
            sweep: None,
            outputs: OutputPaths::default(),
        }
    }

    /// Every violated constraint, in a stable order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        match (&self.topology, &self.graph_file) {
            (None, None) => out.push("one of `topology` or `graph_file` is required".to_owned()),
            (Some(_), Some(_)) => {
                out.push("`topology` and `graph_file` are mutually exclusive".to_owned())
            }
            (Some(t), None) => out.extend(t.violations()),
            (None, Some(_)) => {}
        }
        let m = &self.model;
        if !m.threshold.is_finite() {
            out.push(format!("model.R must be finite, got {}", m.threshold));
        }
        if !(m.beta > 0.0) || !m.beta.is_finite() {
            out.push(format!("model.beta must be > 0, got {}", m.beta));
        }
        if !(m.eta >= 0.0) || !m.eta.is_finite() {
            out.push(format!("model.eta must be >= 0, got {}", m.eta));
        }
        let registry = StrategyRegistry::builtin();
        if !registry.contains(&m.strategy) {
            out.push(format!(
                "model.strategy `{}` is not one of: {}",
                m.strategy,
                registry.names().collect::<Vec<_>>().join(", ")
            ));
        }
        if !(self.money.mean >= 0.0) || !self.money.mean.is_finite() {
            out.push(format!("money.M must be finite and >= 0, got {}", self.money.mean));
        }
        if !self.money.theta.is_finite() {
            out.push(format!("money.theta must be finite, got {}", self.money.theta));
        }
        if self.run.realizations < 1 {
            out.push("run.realizations must be >= 1".to_owned());
        }
        if self.run.max_steps < 1 {
            out.push("run.max_steps must be >= 1".to_owned());
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                out.push("sweep.values must not be empty".to_owned());
            }
            for (i, v) in sweep.values.iter().enumerate() {
                if !v.is_finite() {
                    out.push(format!("sweep.values[{i}] must be finite, got {v}"));
                } else if sweep.parameter == SweepParam::Money && *v < 0.0 {
                    out.push(format!("sweep.values[{i}] is a negative money value {v}"));
                }
            }
        }
        for (name, path) in self.outputs.iter() {
            let parent = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            if !parent.is_dir() {
                out.push(format!(
                    "{name}: directory {} does not exist",
                    parent.display()
                ));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    /// Sweep values, or the single configured point when there is no sweep.
    pub fn sweep_points(&self) -> Vec<f64> {
        match &self.sweep {
            Some(s) => s.values.clone(),
            None => vec![0.0],
        }
    }

    pub fn sweep_param_name(&self) -> &'static str {
        self.sweep.as_ref().map_or("none", |s| s.parameter.name())
    }

    /// Money settings at a sweep value.
    pub fn money_at(&self, sweep_value: f64) -> MoneyConfig {
        let mut money = self.money;
        match self.sweep.as_ref().map(|s| s.parameter) {
            Some(SweepParam::Money) => money.mean = sweep_value,
            Some(SweepParam::Theta) => money.theta = sweep_value,
            None => {}
        }
        money
    }
}

/// Parses `text` as an experiment config; `origin` labels error messages.
pub fn parse_config(text: &str, origin: &Path) -> Result<ExperimentConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig =
        serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let message = if path == "." {
                inner.to_string()
            } else {
                format!("field `{path}`: {inner}")
            };
            Error::Parse {
                path: origin.to_path_buf(),
                message,
            }
        })?;
    config.validate()?;
    Ok(config)
}

/// Reads, parses and validates a JSON config file, applying defaults.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}
