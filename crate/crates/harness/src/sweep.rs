//! Cartesian hyperparameter sweeps over a base config.

use crate::config::{ExperimentConfig, ALGORITHM_KEYS, ENV_KEYS, RUN_KEYS};
use crate::error::{HarnessError, Result};
use crate::run::{run_experiment, ExperimentOutput};

/// One swept key and its values. `section` is `env`, `algorithm` or `run`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub section: String,
    pub key: String,
    pub values: Vec<toml::Value>,
}

impl GridAxis {
    pub fn label(&self) -> String {
        format!("{}.{}", self.section, self.key)
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let raw = raw.trim();
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Parses `key=v1,v2,...`. A bare key means `algorithm.key`; values are
/// read as TOML scalars, falling back to strings.
pub fn parse_grid(arg: &str) -> Result<GridAxis> {
    let (key, values) = arg
        .split_once('=')
        .ok_or_else(|| HarnessError::Grid(format!("expected `key=v1,v2,...`, got `{arg}`")))?;
    let key = key.trim();
    let (section, key) = key.split_once('.').unwrap_or(("algorithm", key));
    let known = match section {
        "env" => ENV_KEYS,
        "algorithm" => ALGORITHM_KEYS,
        "run" => RUN_KEYS,
        _ => {
            return Err(HarnessError::UnknownName {
                kind: "config section",
                name: section.to_string(),
                known: "env, algorithm, run".to_string(),
            })
        }
    };
    if !known.contains(&key) {
        return Err(HarnessError::UnknownName {
            kind: "grid key",
            name: format!("{section}.{key}"),
            known: known.join(", "),
        });
    }
    let values: Vec<toml::Value> = values
        .split(',')
        .filter(|v| !v.trim().is_empty())
        .map(parse_value)
        .collect();
    if values.is_empty() {
        return Err(HarnessError::Grid(format!("no values for `{section}.{key}`")));
    }
    Ok(GridAxis {
        section: section.to_string(),
        key: key.to_string(),
        values,
    })
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    /// One value per axis, in axis order.
    pub point: Vec<toml::Value>,
    /// Mean over replicates of the last episode's RMS error.
    pub final_rms: Option<f64>,
    /// Mean episode return over all replicates and episodes.
    pub mean_return: f64,
    pub output: ExperimentOutput,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axes: Vec<GridAxis>,
    pub rows: Vec<SweepRow>,
}

fn point_config(base: &toml::Table, axes: &[GridAxis], point: &[toml::Value]) -> Result<ExperimentConfig> {
    let mut table = base.clone();
    for (axis, value) in axes.iter().zip(point) {
        let section = table
            .entry(axis.section.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        let section = section
            .as_table_mut()
            .ok_or_else(|| HarnessError::Grid(format!("`{}` is not a table", axis.section)))?;
        section.insert(axis.key.clone(), value.clone());
    }
    ExperimentConfig::from_table(table)
}

/// Runs every grid point of `base` in row-major order, first axis slowest.
/// `base` is the raw config table so overrides see the unvalidated values.
pub fn sweep(base: &toml::Table, axes: &[GridAxis]) -> Result<SweepResult> {
    if axes.is_empty() || axes.iter().any(|a| a.values.is_empty()) {
        return Err(HarnessError::Grid("empty grid".to_string()));
    }
    let n_points: usize = axes.iter().map(|a| a.values.len()).product();
    let mut rows = Vec::with_capacity(n_points);
    for idx in 0..n_points {
        let mut rem = idx;
        let mut point = vec![toml::Value::Boolean(false); axes.len()];
        for (i, axis) in axes.iter().enumerate().rev() {
            point[i] = axis.values[rem % axis.values.len()].clone();
            rem /= axis.values.len();
        }
        let cfg = point_config(base, axes, &point)?;
        let output = run_experiment(&cfg)?;
        let mean_return =
            output.records.iter().map(|r| r.episode_return).sum::<f64>() / output.records.len() as f64;
        let final_rms = output.summary.last().and_then(|s| s.rms_mean);
        rows.push(SweepRow {
            point,
            final_rms,
            mean_return,
            output,
        });
    }
    Ok(SweepResult {
        axes: axes.to_vec(),
        rows,
    })
}

fn value_text(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl SweepResult {
    /// The summary table: one column per axis, then `final_rms` and
    /// `mean_return`.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = self.axes.iter().map(GridAxis::label).collect();
        header.push("final_rms".into());
        header.push("mean_return".into());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut cells: Vec<String> = row.point.iter().map(value_text).collect();
            cells.push(row.final_rms.map(|x| x.to_string()).unwrap_or_default());
            cells.push(row.mean_return.to_string());
            w.write_record(&cells)?;
        }
        w.into_inner()
            .map_err(|e| HarnessError::io("<memory>", e.into_error()))
    }
}
