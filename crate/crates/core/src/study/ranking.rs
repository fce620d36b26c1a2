//! Per-patient ranking and mode aggregation.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{csv_bytes, write_file, StudyError};
use crate::metrics::{Direction, Metric, MetricReport};

/// Ranks of segmentors (columns) under each metric (rows), 1 = best.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTable {
    pub metrics: Vec<Metric>,
    pub segmentors: Vec<String>,
    pub ranks: Vec<Vec<u32>>,
}

/// Competition ranks ("1224") of `values` under `direction`; `None` ranks
/// last, at `values.len()`.
pub fn rank_values(values: &[Option<f64>], direction: Direction) -> Vec<u32> {
    let s = values.len() as u32;
    let better = |a: f64, b: f64| match direction {
        Direction::HigherIsBetter => a > b,
        Direction::LowerIsBetter => a < b,
    };
    values
        .iter()
        .map(|v| match v {
            None => s,
            Some(v) => 1 + values.iter().flatten().filter(|&&o| better(o, *v)).count() as u32,
        })
        .collect()
}

/// Ranks the reports of one patient, one per segmentor, under all twenty
/// metrics. Undefined values rank last.
pub fn rank_per_patient(
    reports: &[&MetricReport],
    segmentors: &[String],
) -> Result<RankTable, StudyError> {
    if reports.len() < 2 {
        return Err(StudyError::TooFewSegmentors(reports.len()));
    }
    if reports.len() != segmentors.len() {
        return Err(StudyError::ShapeMismatch("segmentor count"));
    }
    let mut ranks = Vec::with_capacity(Metric::ALL.len());
    for metric in Metric::ALL {
        let present = reports.iter().filter(|r| r.get(metric).is_some()).count();
        if present != 0 && present != reports.len() {
            let i = reports
                .iter()
                .position(|r| r.get(metric).is_none())
                .expect("one is missing");
            return Err(StudyError::MissingMetric {
                segmentor: segmentors[i].clone(),
                metric,
            });
        }
        let values: Vec<Option<f64>> = reports.iter().map(|r| r.value(metric)).collect();
        ranks.push(rank_values(&values, metric.direction()));
    }
    Ok(RankTable {
        metrics: Metric::ALL.to_vec(),
        segmentors: segmentors.to_vec(),
        ranks,
    })
}

/// The most frequent rank of every cell across patients; ties go to the
/// smaller rank.
pub fn mode_aggregate(tables: &[RankTable]) -> Result<RankTable, StudyError> {
    let first = tables.first().ok_or(StudyError::NoPatients)?;
    for t in tables {
        if t.metrics != first.metrics {
            return Err(StudyError::ShapeMismatch("metrics"));
        }
        if t.segmentors != first.segmentors {
            return Err(StudyError::ShapeMismatch("segmentors"));
        }
    }
    let ranks = (0..first.metrics.len())
        .map(|m| {
            (0..first.segmentors.len())
                .map(|s| {
                    let mut counts = BTreeMap::new();
                    for t in tables {
                        *counts.entry(t.ranks[m][s]).or_insert(0usize) += 1;
                    }
                    // max_by_key keeps the last maximum; walking ranks in
                    // descending order makes that the smallest rank
                    counts
                        .into_iter()
                        .rev()
                        .max_by_key(|&(_, n)| n)
                        .map(|(r, _)| r)
                        .expect("at least one table")
                })
                .collect()
        })
        .collect();
    Ok(RankTable {
        metrics: first.metrics.clone(),
        segmentors: first.segmentors.clone(),
        ranks,
    })
}

const TABLE3_CSV: &str = include_str!("../../data/table3_mode_ranks.csv");

/// The published mode-rank table of the ten reference segmentors.
pub fn table3_fixture() -> RankTable {
    RankTable::from_csv(TABLE3_CSV.as_bytes(), Path::new("table3_mode_ranks.csv"))
        .expect("shipped fixture parses")
}

impl RankTable {
    pub fn row(&self, metric: Metric) -> Option<&[u32]> {
        let i = self.metrics.iter().position(|&m| m == metric)?;
        Some(&self.ranks[i])
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut rows = vec![std::iter::once("metric".to_string())
            .chain(self.segmentors.iter().cloned())
            .collect()];
        for (m, r) in self.metrics.iter().zip(&self.ranks) {
            rows.push(
                std::iter::once(m.to_string())
                    .chain(r.iter().map(u32::to_string))
                    .collect(),
            );
        }
        csv_bytes(&rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), StudyError> {
        write_file(path, &self.to_csv())
    }

    pub fn read_csv(path: &Path) -> Result<Self, StudyError> {
        let bytes = std::fs::read(path).map_err(|e| StudyError::io(path, e))?;
        Self::from_csv(&bytes, path)
    }

    /// Parses the `metric,<segmentor ids>` layout written by [`to_csv`](Self::to_csv).
    pub fn from_csv(bytes: &[u8], path: &Path) -> Result<Self, StudyError> {
        let bad = |reason: String| StudyError::parse(path, reason);
        let mut reader = csv::Reader::from_reader(bytes);
        let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
        let segmentors: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        if segmentors.len() < 2 {
            return Err(bad("need at least two segmentor columns".into()));
        }
        let (mut metrics, mut ranks) = (Vec::new(), Vec::new());
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| bad(e.to_string()))?;
            let metric: Metric = record[0]
                .trim()
                .parse()
                .map_err(|e| bad(format!("row {}: {e}", line + 1)))?;
            if metrics.contains(&metric) {
                return Err(bad(format!("{metric} listed twice")));
            }
            let row = record
                .iter()
                .skip(1)
                .map(|v| match v.trim().parse::<u32>() {
                    Ok(r) if (1..=segmentors.len() as u32).contains(&r) => Ok(r),
                    _ => Err(bad(format!(
                        "{metric}: rank `{v}` is not in 1..={}",
                        segmentors.len()
                    ))),
                })
                .collect::<Result<Vec<u32>, _>>()?;
            metrics.push(metric);
            ranks.push(row);
        }
        Ok(Self {
            metrics,
            segmentors,
            ranks,
        })
    }
}
