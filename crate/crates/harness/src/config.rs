//! Experiment configuration: a TOML document with `[env]`, `[algorithm]`
//! and `[run]` tables. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub run: RunConfig,
}

/// Environment name and parameters. Fields that do not apply to the named
/// environment are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    pub name: String,
    /// `random_walk`: non-terminal states (odd, ≥ 3). Default 5.
    pub n_states: Option<usize>,
    /// `gridworld`: default 4 × 4.
    pub width: Option<usize>,
    pub height: Option<usize>,
    /// `gridworld`: default −1.
    pub step_reward: Option<f64>,
    /// `gridworld`: `[x, y]` cells. Default: the two opposite corners.
    pub terminals: Option<Vec<[usize; 2]>>,
    /// `bandit`: reward of each arm. Default `[1, 0]`.
    pub rewards: Option<Vec<f64>>,
    /// `mdp_file`: path to the model.
    pub path: Option<PathBuf>,
    /// `mdp_file`: start state. Default: uniform over non-terminal states.
    pub start: Option<usize>,
    /// `trading`: `random_walk` (default), `sine` or `csv`.
    pub prices: Option<String>,
    pub price_file: Option<PathBuf>,
    pub length: Option<usize>,
    pub initial_price: Option<f64>,
    pub drift: Option<f64>,
    pub volatility: Option<f64>,
    pub base: Option<f64>,
    pub amplitude: Option<f64>,
    pub period: Option<f64>,
    pub noise: Option<f64>,
    pub price_seed: Option<u64>,
    /// `trading`: prices in the observation window. Default 3.
    pub window: Option<usize>,
    /// `trading`: cost per unit of position change. Default 0.
    pub cost: Option<f64>,
    /// `trading`: `dsr` (default) or `raw`.
    pub reward: Option<String>,
    /// `trading`: DSR adaptation rate. Default 0.05.
    pub eta: Option<f64>,
}

/// Algorithm name and hyperparameters. Unused fields are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub name: String,
    /// Default 0.1.
    pub alpha: Option<f64>,
    /// `constant` (default) or `inverse_visits` (TD(0) only).
    pub step_size: Option<String>,
    /// Default: the environment model's γ, else 0.9.
    pub gamma: Option<f64>,
    /// Default 0.5.
    pub lambda: Option<f64>,
    /// n-step TD horizon. Default 3.
    pub n: Option<usize>,
    /// Default 0.1, decay 1, floor 0.
    pub epsilon: Option<f64>,
    pub epsilon_decay: Option<f64>,
    pub epsilon_min: Option<f64>,
    /// Initial value of non-terminal tabular entries. Default 0.
    pub initial_value: Option<f64>,
    /// `one_hot` (default) or `aggregate`.
    pub features: Option<String>,
    pub n_groups: Option<usize>,
    /// Actor-critic rates. Critic defaults to 10 × actor.
    pub alpha_actor: Option<f64>,
    pub alpha_critic: Option<f64>,
    /// `none` (default), `lambda` or `gamma_lambda`.
    pub actor_trace: Option<String>,
    /// LSTD ridge used when `A` is singular. Default: none.
    pub ridge: Option<f64>,
    /// LSTD/LSTDQ: experience CSV added to the batch before learning.
    pub batch_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub replicates: usize,
    pub episodes: usize,
    pub max_steps: usize,
    pub parallel: bool,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            replicates: 1,
            episodes: 100,
            max_steps: 10_000,
            parallel: false,
            out: None,
        }
    }
}

/// Keys accepted in each table.
pub const ENV_KEYS: &[&str] = &[
    "name", "n_states", "width", "height", "step_reward", "terminals", "rewards", "path", "start",
    "prices", "price_file", "length", "initial_price", "drift", "volatility", "base", "amplitude",
    "period", "noise", "price_seed", "window", "cost", "reward", "eta",
];
pub const ALGORITHM_KEYS: &[&str] = &[
    "name", "alpha", "step_size", "gamma", "lambda", "n", "epsilon", "epsilon_decay",
    "epsilon_min", "initial_value", "features", "n_groups", "alpha_actor", "alpha_critic",
    "actor_trace", "ridge", "batch_file",
];
pub const RUN_KEYS: &[&str] = &["seed", "replicates", "episodes", "max_steps", "parallel", "out"];

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: Self = toml::Value::Table(table).try_into()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file; relative data paths resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_table(load_table(path)?)
    }

    /// Checks the ranges the runner relies on; names are checked when the
    /// experiment is built.
    pub fn validate(&self) -> Result<()> {
        let a = &self.algorithm;
        if let Some(g) = a.gamma {
            if !(g > 0.0 && g <= 1.0) {
                return Err(HarnessError::range("gamma", g, "0 < gamma <= 1"));
            }
        }
        for (name, v) in [
            ("lambda", a.lambda),
            ("epsilon", a.epsilon),
            ("epsilon_decay", a.epsilon_decay),
            ("epsilon_min", a.epsilon_min),
        ] {
            if let Some(x) = v {
                if !(0.0..=1.0).contains(&x) {
                    return Err(HarnessError::range(name, x, "a value in [0, 1]"));
                }
            }
        }
        for (name, v) in [
            ("alpha", a.alpha),
            ("alpha_actor", a.alpha_actor),
            ("alpha_critic", a.alpha_critic),
            ("ridge", a.ridge),
        ] {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(HarnessError::range(name, x, "a finite value > 0"));
                }
            }
        }
        if a.n == Some(0) {
            return Err(HarnessError::range("n", 0, "n >= 1"));
        }
        let r = &self.run;
        if r.replicates == 0 {
            return Err(HarnessError::range("replicates", 0, "at least 1"));
        }
        if r.episodes == 0 {
            return Err(HarnessError::range("episodes", 0, "at least 1"));
        }
        if r.max_steps == 0 {
            return Err(HarnessError::range("max_steps", 0, "at least 1"));
        }
        Ok(())
    }
}

/// Data-file keys that are resolved relative to the config file.
const PATH_KEYS: &[(&str, &str)] = &[("env", "path"), ("env", "price_file"), ("algorithm", "batch_file")];

/// Reads a config file as a raw table, before validation, with relative
/// data paths resolved against the file's directory.
pub fn load_table(path: &Path) -> Result<toml::Table> {
    let mut table: toml::Table = toml::from_str(&read_text(path)?)?;
    let dir = path.parent().unwrap_or(Path::new(""));
    for (section, key) in PATH_KEYS {
        let entry = table
            .get_mut(*section)
            .and_then(toml::Value::as_table_mut)
            .and_then(|t| t.get_mut(*key));
        if let Some(toml::Value::String(p)) = entry {
            if Path::new(p.as_str()).is_relative() {
                *p = dir.join(p.as_str()).to_string_lossy().into_owned();
            }
        }
    }
    Ok(table)
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[env]
name = "random_walk"

[algorithm]
name = "td0"
"#;

    #[test]
    fn defaults_fill_the_run_table() {
        let cfg = ExperimentConfig::from_toml(BASE).unwrap();
        assert_eq!(cfg.run, RunConfig::default());
        assert_eq!(cfg.env.n_states, None);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{BASE}lamda = 0.5\n");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(HarnessError::Config(_))));
        let text = "[env]\nname = \"random_walk\"\n[algorithm]\nname = \"td0\"\n[runn]\nseed = 1\n";
        assert!(ExperimentConfig::from_toml(text).is_err());
    }

    #[test]
    fn ranges_are_checked() {
        for (key, value) in [("gamma", "0.0"), ("gamma", "1.5"), ("lambda", "-0.1"), ("epsilon", "2.0"), ("alpha", "0.0")] {
            let text = format!("{BASE}{key} = {value}\n");
            let err = ExperimentConfig::from_toml(&text).unwrap_err();
            assert_eq!(err.exit_code(), 3, "{key}");
        }
        let text = format!("{BASE}[run]\nreplicates = 0\n");
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn data_paths_resolve_against_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        std::fs::write(&path, "[env]\nname = \"mdp_file\"\npath = \"chain.mdp\"\n[algorithm]\nname = \"td0\"\n").unwrap();
        let cfg = ExperimentConfig::load(&path).unwrap();
        assert_eq!(cfg.env.path, Some(dir.path().join("chain.mdp")));
    }

    #[test]
    fn key_lists_match_the_schema() {
        let full = |section: &str, key: &str| {
            let mut t: toml::Table = toml::from_str(BASE).unwrap();
            let value = match key {
                "name" => return,
                "terminals" => toml::Value::Array(vec![toml::Value::Array(vec![0.into(), 0.into()])]),
                "rewards" => toml::Value::Array(vec![1.0.into()]),
                "path" | "price_file" | "batch_file" | "out" | "prices" | "reward" | "step_size" | "features" | "actor_trace" => "x".into(),
                "parallel" => true.into(),
                "step_reward" | "initial_price" | "drift" | "volatility" | "base" | "amplitude" | "period" | "noise" | "cost" | "eta" | "alpha" | "gamma" | "lambda" | "epsilon" | "epsilon_decay" | "epsilon_min" | "initial_value" | "alpha_actor" | "alpha_critic" | "ridge" => 0.5.into(),
                _ => 3.into(),
            };
            t.entry(section).or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .unwrap()
                .insert(key.to_string(), value);
            ExperimentConfig::from_table(t).unwrap_or_else(|e| panic!("{section}.{key}: {e}"));
        };
        for k in ENV_KEYS {
            full("env", k);
        }
        for k in ALGORITHM_KEYS {
            full("algorithm", k);
        }
        for k in RUN_KEYS {
            full("run", k);
        }
    }
}
