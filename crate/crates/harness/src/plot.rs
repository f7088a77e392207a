//! Long-format plot data: one `(replicate, episode, metric, value)` row per
//! record.

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::run::RunRecord;

pub const METRICS: &[&str] = &["episode_return", "steps", "rms_error"];

/// `value` is empty when the record lacks the metric (no oracle).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub replicate: usize,
    pub episode: usize,
    pub metric: String,
    pub value: Option<f64>,
}

fn metric_value(r: &RunRecord, metric: &str) -> Option<f64> {
    match metric {
        "episode_return" => Some(r.episode_return),
        "steps" => Some(r.steps as f64),
        _ => r.rms_error,
    }
}

pub fn plot_rows(records: &[RunRecord], metric: &str) -> Result<Vec<PlotRow>> {
    if !METRICS.contains(&metric) {
        return Err(HarnessError::UnknownMetric {
            name: metric.to_string(),
            available: METRICS.join(", "),
        });
    }
    Ok(records
        .iter()
        .map(|r| PlotRow {
            replicate: r.replicate,
            episode: r.episode,
            metric: metric.to_string(),
            value: metric_value(r, metric),
        })
        .collect())
}

/// CSV with header `replicate,episode,metric,value`.
pub fn emit_plotdata(records: &[RunRecord], metric: &str) -> Result<Vec<u8>> {
    let rows = plot_rows(records, metric)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(["replicate", "episode", "metric", "value"])?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.into_inner()
        .map_err(|e| HarnessError::io("<memory>", e.into_error()))
}

pub fn parse_plotdata(text: &[u8]) -> Result<Vec<PlotRow>> {
    csv::Reader::from_reader(text)
        .deserialize()
        .map(|r| r.map_err(HarnessError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records() -> Vec<RunRecord> {
        (0..20)
            .map(|i| RunRecord {
                replicate: i / 10,
                episode: i % 10,
                episode_return: -(i as f64) / 7.0,
                steps: i + 1,
                rms_error: (i % 3 != 0).then(|| 1.0 / (i as f64 + 3.0)),
            })
            .collect()
    }

    #[test]
    fn one_row_per_record() {
        let out = emit_plotdata(&records(), "steps").unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 21);
        assert_eq!(text.lines().next(), Some("replicate,episode,metric,value"));
    }

    #[test]
    fn unknown_metric_lists_the_available_ones() {
        let err = emit_plotdata(&records(), "reward").unwrap_err();
        let msg = err.to_string();
        for m in METRICS {
            assert!(msg.contains(m), "{msg}");
        }
    }

    #[test]
    fn emitted_csv_parses_back_to_the_records() {
        let recs = records();
        for metric in METRICS {
            let back = parse_plotdata(&emit_plotdata(&recs, metric).unwrap()).unwrap();
            assert_eq!(back.len(), recs.len());
            for (row, r) in back.iter().zip(&recs) {
                assert_eq!((row.replicate, row.episode), (r.replicate, r.episode));
                assert_eq!(row.metric, *metric);
                let expected = match *metric {
                    "episode_return" => Some(r.episode_return),
                    "steps" => Some(r.steps as f64),
                    _ => r.rms_error,
                };
                assert_eq!(row.value.map(f64::to_bits), expected.map(f64::to_bits));
            }
        }
    }

    #[test]
    fn empty_records_still_have_a_header() {
        let out = emit_plotdata(&[], "steps").unwrap();
        assert_eq!(out, b"replicate,episode,metric,value\n");
    }
}
