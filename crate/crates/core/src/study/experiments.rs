//! The range and true-negative experiments.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{csv_bytes, write_file, StudyError};
use crate::mask_io::BinaryMask;
use crate::metrics::{
    confusion, evaluate_all_with, Direction, EvalOptions, Metric, MetricReport, MetricValue,
};

/// How a metric behaved over the best, middle and worst cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeClass {
    /// Stays in [0, 1] and reaches the ideal value at best and the opposite
    /// end at worst.
    ReachesBounds,
    /// Stays in [0, 1].
    WithinUnit,
    /// Leaves [0, 1] in at least one case.
    ExitsUnit,
}

impl RangeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RangeClass::ReachesBounds => "reaches_bounds",
            RangeClass::WithinUnit => "within_unit",
            RangeClass::ExitsUnit => "exits_unit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeRow {
    pub metric: Metric,
    pub best: MetricValue,
    pub middle: MetricValue,
    pub worst: MetricValue,
    pub class: RangeClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeTable {
    pub rows: Vec<RangeRow>,
}

/// Values within this of 0 or 1 print as 0.000 or 1.000 and count as
/// reaching the bound (ICC of disjoint masks is 1/(2n - 1), not 0).
const DISPLAY_EPS: f64 = 5e-4;

fn classify(
    metric: Metric,
    best: &MetricValue,
    middle: &MetricValue,
    worst: &MetricValue,
) -> RangeClass {
    let defined: Vec<f64> = [best, middle, worst]
        .iter()
        .filter_map(|v| v.value())
        .collect();
    if defined.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return RangeClass::ExitsUnit;
    }
    let (ideal, opposite) = match metric.direction() {
        Direction::HigherIsBetter => (1.0, 0.0),
        Direction::LowerIsBetter => (0.0, 1.0),
    };
    let near =
        |v: &MetricValue, target: f64| v.value().is_some_and(|x| (x - target).abs() < DISPLAY_EPS);
    if near(best, ideal) && near(worst, opposite) {
        RangeClass::ReachesBounds
    } else {
        RangeClass::WithinUnit
    }
}

/// Evaluates the three cases against `truth` and classifies every metric.
/// `best` must equal `truth` and `worst` must not overlap it.
pub fn range_experiment(
    truth: &BinaryMask,
    best: &BinaryMask,
    middle: &BinaryMask,
    worst: &BinaryMask,
    options: &EvalOptions,
) -> Result<RangeTable, StudyError> {
    if best != truth {
        return Err(StudyError::Precondition(
            "best case must equal the truth".into(),
        ));
    }
    if confusion(truth, worst)?.tp != 0 {
        return Err(StudyError::Precondition(
            "worst case must not overlap the truth".into(),
        ));
    }
    let reports = [best, middle, worst].map(|pred| evaluate_all_with(truth, pred, options));
    let [b, m, w] = reports;
    let (b, m, w) = (b?, m?, w?);
    let get = |r: &MetricReport, metric| {
        r.get(metric)
            .cloned()
            .expect("evaluate_all fills every metric")
    };
    let rows = Metric::ALL
        .into_iter()
        .map(|metric| {
            let (best, middle, worst) = (get(&b, metric), get(&m, metric), get(&w, metric));
            RangeRow {
                metric,
                class: classify(metric, &best, &middle, &worst),
                best,
                middle,
                worst,
            }
        })
        .collect();
    Ok(RangeTable { rows })
}

fn cell(v: &MetricValue) -> String {
    v.value().map(|x| x.to_string()).unwrap_or_default()
}

impl RangeTable {
    pub fn row(&self, metric: Metric) -> &RangeRow {
        &self.rows[metric.index()]
    }

    /// `metric,direction,best,middle,worst,class`.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut rows = vec![["metric", "direction", "best", "middle", "worst", "class"]
            .map(String::from)
            .to_vec()];
        for r in &self.rows {
            rows.push(vec![
                r.metric.to_string(),
                r.metric.direction().sign().to_string(),
                cell(&r.best),
                cell(&r.middle),
                cell(&r.worst),
                r.class.as_str().to_string(),
            ]);
        }
        csv_bytes(&rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), StudyError> {
        write_file(path, &self.to_csv())
    }
}

/// Background rows and columns added around the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Padding {
    pub top: usize,
    pub bottom: usize,
    pub left: usize,
    pub right: usize,
}

impl Padding {
    pub fn uniform(k: usize) -> Self {
        Self {
            top: k,
            bottom: k,
            left: k,
            right: k,
        }
    }

    pub fn apply(&self, mask: &BinaryMask) -> BinaryMask {
        mask.pad(self.top, self.bottom, self.left, self.right)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TnRow {
    pub padding: Padding,
    pub tn: u64,
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TnTable {
    pub rows: Vec<TnRow>,
    /// Per metric in reporting order: whether any row differs from the
    /// first by more than 1e-12 (or switches between defined and undefined).
    pub changed: Vec<(Metric, bool)>,
}

/// Absolute difference above which a value counts as changed.
const CHANGE_EPS: f64 = 1e-12;

/// Evaluates `(truth, pred)` under each padding. TN must grow strictly from
/// one padding to the next.
pub fn tn_experiment(
    truth: &BinaryMask,
    pred: &BinaryMask,
    paddings: &[Padding],
    options: &EvalOptions,
) -> Result<TnTable, StudyError> {
    truth.check_same_frame(pred)?;
    if paddings.is_empty() {
        return Err(StudyError::Precondition(
            "at least one padding is needed".into(),
        ));
    }
    let mut rows: Vec<TnRow> = Vec::with_capacity(paddings.len());
    for padding in paddings {
        let (t, p) = (padding.apply(truth), padding.apply(pred));
        let tn = confusion(&t, &p)?.tn;
        if let Some(prev) = rows.last() {
            if tn <= prev.tn {
                return Err(StudyError::Precondition(format!(
                    "paddings must strictly increase TN ({} then {tn})",
                    prev.tn
                )));
            }
        }
        rows.push(TnRow {
            padding: *padding,
            tn,
            report: evaluate_all_with(&t, &p, options)?,
        });
    }
    let first = &rows[0].report;
    let changed = Metric::ALL
        .into_iter()
        .map(|m| {
            let differs = rows
                .iter()
                .any(|r| match (first.value(m), r.report.value(m)) {
                    (Some(a), Some(b)) => (a - b).abs() > CHANGE_EPS,
                    (None, None) => false,
                    _ => true,
                });
            (m, differs)
        })
        .collect();
    Ok(TnTable { rows, changed })
}

impl TnTable {
    pub fn is_changed(&self, metric: Metric) -> bool {
        self.changed[metric.index()].1
    }

    /// `tn,<metric symbols>`, one row per padding.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut rows = vec![std::iter::once("tn".to_string())
            .chain(Metric::ALL.map(|m| m.to_string()))
            .collect::<Vec<_>>()];
        for r in &self.rows {
            rows.push(
                std::iter::once(r.tn.to_string())
                    .chain(Metric::ALL.map(|m| r.report.get(m).map(cell).unwrap_or_default()))
                    .collect(),
            );
        }
        csv_bytes(&rows)
    }

    /// `metric,changed`.
    pub fn changed_csv(&self) -> Vec<u8> {
        let mut rows = vec![vec!["metric".to_string(), "changed".to_string()]];
        rows.extend(
            self.changed
                .iter()
                .map(|(m, c)| vec![m.to_string(), c.to_string()]),
        );
        csv_bytes(&rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), StudyError> {
        write_file(path, &self.to_csv())
    }
}
