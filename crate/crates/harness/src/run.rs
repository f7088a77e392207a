//! Replicated experiment runs and their CSV records.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tdrl_core::agents::{oracle_values, rms_error};
use tdrl_core::rng;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::registry::{build_agent, build_env, check_algorithm_name, check_env_name, effective_gamma};

/// One episode of one replicate. `rms_error` is present when the environment
/// has an exact model and the agent exposes state values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub replicate: usize,
    pub episode: usize,
    pub episode_return: f64,
    pub steps: usize,
    pub rms_error: Option<f64>,
}

/// Per-episode statistics across replicates. Standard deviations use the
/// `n - 1` denominator and are 0 for a single replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub episode: usize,
    pub replicates: usize,
    pub return_mean: f64,
    pub return_std: f64,
    pub steps_mean: f64,
    pub steps_std: f64,
    pub rms_mean: Option<f64>,
    pub rms_std: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    /// Replicate-major, episode-minor.
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    /// Wall time of each replicate. Kept out of the CSV so reruns compare
    /// byte for byte.
    pub wall_time: Vec<Duration>,
}

/// Seed of the environment for episode `k` of a replicate.
pub fn episode_seed(replicate_seed: u64, k: usize) -> u64 {
    replicate_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(k as u64)
}

/// Runs one replicate with its own environment, agent and seed.
pub fn run_replicate(cfg: &ExperimentConfig, replicate: usize) -> Result<(Vec<RunRecord>, Duration)> {
    let start = Instant::now();
    let seed = rng::derive(cfg.run.seed, replicate as u64);
    let mut built = build_env(&cfg.env)?;
    let mut agent = build_agent(&cfg.algorithm, &built, seed)?;
    let oracle = match &built.model {
        Some(model) => {
            let model = model.with_gamma(effective_gamma(&cfg.algorithm, &built))?;
            oracle_values(&model, agent.oracle())?
        }
        None => None,
    };
    let terminal = built.terminal_mask();
    let mut records = Vec::with_capacity(cfg.run.episodes);
    for k in 0..cfg.run.episodes {
        let summary = agent.run_episode(built.env.as_mut(), episode_seed(seed, k), cfg.run.max_steps)?;
        let rms = match (&oracle, agent.state_values()) {
            (Some(o), Some(v)) => Some(rms_error(&v, o, &terminal)),
            _ => None,
        };
        if !summary.episode_return.is_finite() || rms.is_some_and(|r| !r.is_finite()) {
            return Err(HarnessError::NonFinite(format!("replicate {replicate}, episode {k}")));
        }
        records.push(RunRecord {
            replicate,
            episode: k,
            episode_return: summary.episode_return,
            steps: summary.steps,
            rms_error: rms,
        });
    }
    Ok((records, start.elapsed()))
}

/// Runs every replicate (seeds `seed + i`), in parallel when
/// `run.parallel` is set. Output order never depends on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    check_env_name(&cfg.env.name)?;
    check_algorithm_name(&cfg.algorithm.name)?;
    let reps: Vec<(Vec<RunRecord>, Duration)> = if cfg.run.parallel {
        (0..cfg.run.replicates)
            .into_par_iter()
            .map(|i| run_replicate(cfg, i))
            .collect::<Result<_>>()?
    } else {
        (0..cfg.run.replicates)
            .map(|i| run_replicate(cfg, i))
            .collect::<Result<_>>()?
    };
    let (records, wall_time): (Vec<Vec<RunRecord>>, Vec<Duration>) = reps.into_iter().unzip();
    let records: Vec<RunRecord> = records.into_iter().flatten().collect();
    let summary = summarize(&records, cfg.run.episodes);
    Ok(ExperimentOutput {
        records,
        summary,
        wall_time,
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Per-episode mean and standard deviation across replicates.
pub fn summarize(records: &[RunRecord], episodes: usize) -> Vec<SummaryRow> {
    (0..episodes)
        .filter_map(|k| {
            let rows: Vec<&RunRecord> = records.iter().filter(|r| r.episode == k).collect();
            if rows.is_empty() {
                return None;
            }
            let returns: Vec<f64> = rows.iter().map(|r| r.episode_return).collect();
            let steps: Vec<f64> = rows.iter().map(|r| r.steps as f64).collect();
            let rms: Option<Vec<f64>> = rows.iter().map(|r| r.rms_error).collect();
            let (return_mean, return_std) = mean_std(&returns);
            let (steps_mean, steps_std) = mean_std(&steps);
            let (rms_mean, rms_std) = match rms {
                Some(v) => {
                    let (m, s) = mean_std(&v);
                    (Some(m), Some(s))
                }
                None => (None, None),
            };
            Some(SummaryRow {
                episode: k,
                replicates: rows.len(),
                return_mean,
                return_std,
                steps_mean,
                steps_std,
                rms_mean,
                rms_std,
            })
        })
        .collect()
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| HarnessError::io("<memory>", e.into_error()))
}

/// Records as CSV bytes, header included even when there are no rows.
pub fn records_to_csv(records: &[RunRecord]) -> Result<Vec<u8>> {
    if records.is_empty() {
        return Ok(b"replicate,episode,episode_return,steps,rms_error\n".to_vec());
    }
    to_csv(records)
}

pub fn summary_to_csv(summary: &[SummaryRow]) -> Result<Vec<u8>> {
    to_csv(summary)
}

pub fn parse_records(text: &[u8]) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_reader(text);
    reader.deserialize().map(|r| r.map_err(HarnessError::from)).collect()
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let bytes = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    parse_records(&bytes)
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    f.write_all(bytes).map_err(|e| HarnessError::io(path, e))
}

/// `runs.csv` → `runs.summary.csv`, next to the records file.
pub fn summary_path(records_path: &Path) -> std::path::PathBuf {
    let stem = records_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "records".to_string());
    records_path.with_file_name(format!("{stem}.summary.csv"))
}

/// Writes the records to `path` and the summary next to it.
pub fn write_output(path: &Path, out: &ExperimentOutput) -> Result<()> {
    write_bytes(path, &records_to_csv(&out.records)?)?;
    write_bytes(&summary_path(path), &summary_to_csv(&out.summary)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(replicate: usize, episode: usize, ret: f64, rms: Option<f64>) -> RunRecord {
        RunRecord {
            replicate,
            episode,
            episode_return: ret,
            steps: 3,
            rms_error: rms,
        }
    }

    #[test]
    fn summary_statistics() {
        let records = vec![
            record(0, 0, 1.0, Some(0.2)),
            record(0, 1, 2.0, Some(0.1)),
            record(1, 0, 3.0, Some(0.4)),
            record(1, 1, 2.0, Some(0.3)),
        ];
        let s = summarize(&records, 2);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].return_mean, 2.0);
        assert!((s[0].return_std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s[1].return_std, 0.0);
        assert!((s[0].rms_mean.unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(s[0].replicates, 2);
    }

    #[test]
    fn missing_rms_leaves_the_summary_column_empty() {
        let s = summarize(&[record(0, 0, 1.0, None)], 1);
        assert_eq!(s[0].rms_mean, None);
        assert_eq!(s[0].return_std, 0.0);
    }

    #[test]
    fn records_round_trip_through_csv() {
        let records = vec![record(0, 0, 0.1 + 0.2, Some(1.0 / 3.0)), record(0, 1, -7.0, None)];
        let bytes = records_to_csv(&records).unwrap();
        assert!(bytes.starts_with(b"replicate,episode,episode_return,steps,rms_error\n"));
        assert_eq!(parse_records(&bytes).unwrap(), records);
        assert_eq!(records_to_csv(&[]).unwrap(), b"replicate,episode,episode_return,steps,rms_error\n");
    }

    #[test]
    fn summary_sits_next_to_records() {
        assert_eq!(summary_path(Path::new("out/runs.csv")), Path::new("out/runs.summary.csv"));
    }

    #[test]
    fn seed_zero_episode_seeds_are_the_episode_index() {
        assert_eq!(episode_seed(0, 7), 7);
        assert_ne!(episode_seed(1, 0), episode_seed(2, 0));
    }
}
