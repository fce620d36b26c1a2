//! Rank correlation between metrics and threshold grouping.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{csv_bytes, to_json, write_file, RankTable, StudyError};
use crate::metrics::{Metric, MetricValue};

/// Pearson coefficients between the rank rows of a [`RankTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub metrics: Vec<Metric>,
    pub values: Vec<Vec<MetricValue>>,
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    (saa > 0.0 && sbb > 0.0).then(|| (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation of every pair of metric rows. Rows without
/// variance give undefined cells.
pub fn rank_correlation(table: &RankTable) -> Result<CorrelationMatrix, StudyError> {
    if table.segmentors.len() < 2 {
        return Err(StudyError::TooFewSegmentors(table.segmentors.len()));
    }
    let rows: Vec<Vec<f64>> = table
        .ranks
        .iter()
        .map(|r| r.iter().map(|&v| f64::from(v)).collect())
        .collect();
    let values = rows
        .iter()
        .enumerate()
        .map(|(i, a)| {
            rows.iter()
                .enumerate()
                .map(|(j, b)| match pearson(a, b) {
                    Some(_) if i == j => MetricValue::Value(1.0),
                    Some(r) => MetricValue::Value(r),
                    None => MetricValue::undefined(format!(
                        "constant rank row ({})",
                        if pearson(a, a).is_none() {
                            table.metrics[i]
                        } else {
                            table.metrics[j]
                        }
                    )),
                })
                .collect()
        })
        .collect();
    Ok(CorrelationMatrix {
        metrics: table.metrics.clone(),
        values,
    })
}

impl CorrelationMatrix {
    /// Coefficient between two metrics, `None` if absent or undefined.
    pub fn get(&self, a: Metric, b: Metric) -> Option<f64> {
        let i = self.metrics.iter().position(|&m| m == a)?;
        let j = self.metrics.iter().position(|&m| m == b)?;
        self.values[i][j].value()
    }

    /// Square CSV with an empty cell where the coefficient is undefined.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut rows = vec![std::iter::once("metric".to_string())
            .chain(self.metrics.iter().map(Metric::to_string))
            .collect::<Vec<_>>()];
        for (m, r) in self.metrics.iter().zip(&self.values) {
            rows.push(
                std::iter::once(m.to_string())
                    .chain(
                        r.iter()
                            .map(|v| v.value().map(|x| x.to_string()).unwrap_or_default()),
                    )
                    .collect(),
            );
        }
        csv_bytes(&rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), StudyError> {
        write_file(path, &self.to_csv())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricGroups {
    pub threshold: f64,
    /// Members in metric order; groups ordered by their first member.
    pub groups: Vec<Vec<Metric>>,
}

impl MetricGroups {
    pub fn group_of(&self, metric: Metric) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&metric))
    }

    pub fn write_json(&self, path: &Path) -> Result<(), StudyError> {
        write_file(path, &to_json(self))
    }
}

/// Complete-linkage agglomerative grouping: clusters merge while the
/// smallest pairwise coefficient between them is at least `threshold`.
/// Undefined coefficients count as -1. Among equally similar candidate
/// merges the pair whose first members come earliest in metric order wins,
/// so the result does not depend on the row order of `matrix`.
pub fn group_metrics(
    matrix: &CorrelationMatrix,
    threshold: f64,
) -> Result<MetricGroups, StudyError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(StudyError::InvalidThreshold(threshold));
    }
    let n = matrix.metrics.len();
    let undefined = matrix
        .values
        .iter()
        .flatten()
        .filter(|v| !v.is_defined())
        .count();
    if undefined > 0 {
        tracing::warn!(undefined, "undefined correlations treated as -1");
    }
    let rho = |i: usize, j: usize| matrix.values[i][j].value().unwrap_or(-1.0);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| matrix.metrics[i]);
    let mut clusters: Vec<Vec<usize>> = order.into_iter().map(|i| vec![i]).collect();
    let linkage = |a: &[usize], b: &[usize]| {
        a.iter()
            .flat_map(|&i| b.iter().map(move |&j| (i, j)))
            .map(|(i, j)| rho(i, j))
            .fold(f64::INFINITY, f64::min)
    };
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let s = linkage(&clusters[a], &clusters[b]);
                // strict comparison keeps the earliest pair on ties
                if best.is_none_or(|(bs, _, _)| s > bs) {
                    best = Some((s, a, b));
                }
            }
        }
        match best {
            Some((s, a, b)) if s >= threshold => {
                let merged = clusters.remove(b);
                clusters[a].extend(merged);
                clusters[a].sort_by_key(|&i| matrix.metrics[i]);
            }
            _ => break,
        }
    }
    let mut groups: Vec<Vec<Metric>> = clusters
        .into_iter()
        .map(|c| c.into_iter().map(|i| matrix.metrics[i]).collect())
        .collect();
    groups.sort();
    Ok(MetricGroups { threshold, groups })
}
