//! Metric-ranking studies.
//!
//! The pipeline is: [`run_battery`] synthesizes every (patient, segmentor)
//! cell and evaluates all metrics, [`rank_per_patient`] ranks segmentors on
//! each patient, [`mode_aggregate`] summarizes the ranks over patients,
//! [`rank_correlation`] correlates metric rows and [`group_metrics`] groups
//! metrics that rank segmentors alike. [`range_experiment`] and
//! [`tn_experiment`] are the two stand-alone metric probes.
//!
//! Output files (see [`write_outputs`] and the `write_*` methods):
//!
//! | file | content |
//! |---|---|
//! | `manifest.json` | seed, patients, segmentors, cell counts |
//! | `reports.json` | one entry per cell with report, geometry and provenance |
//! | `table3_mode_ranks.csv` | mode rank per metric and segmentor |
//! | `corr_matrix.csv` | Pearson coefficients between metric rows |
//! | `groups.json` | metric groups and the threshold used |
//! | `table4_ranges.csv` | best/middle/worst values and range class |
//! | `table5_tn.csv` | one row per TN value |

mod battery;
mod corpus;
mod experiments;
mod grouping;
mod ranking;

pub use battery::{run_battery, BatteryStore, Cell, CellGeometry, CellOutcome, Manifest};
pub use corpus::{convex_truths, load_corpus, Patient, DEFAULT_THRESHOLD};
pub use experiments::{
    range_experiment, tn_experiment, Padding, RangeClass, RangeTable, TnRow, TnTable,
};
pub use grouping::{group_metrics, rank_correlation, CorrelationMatrix, MetricGroups};
pub use ranking::{mode_aggregate, rank_per_patient, rank_values, table3_fixture, RankTable};

use std::path::{Path, PathBuf};

use crate::mask_io::MaskError;
use crate::metrics::{Metric, MetricsError};

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error("the truth corpus is empty")]
    EmptyCorpus,
    #[error("no segmentor configurations given")]
    NoConfigs,
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("ranking needs at least 2 segmentors, got {0}")]
    TooFewSegmentors(usize),
    #[error("aggregation needs at least one patient")]
    NoPatients,
    #[error("rank tables disagree on {0}")]
    ShapeMismatch(&'static str),
    #[error("report for segmentor `{segmentor}` has no value slot for {metric}")]
    MissingMetric { segmentor: String, metric: Metric },
    #[error("grouping threshold must be in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("{0}")]
    Precondition(String),
    #[error("failed to read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed file {path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl StudyError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        StudyError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn parse(path: &Path, reason: impl ToString) -> Self {
        StudyError::Parse {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        }
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), StudyError> {
    std::fs::write(path, bytes).map_err(|e| StudyError::io(path, e))
}

pub(crate) fn create_dir(dir: &Path) -> Result<(), StudyError> {
    std::fs::create_dir_all(dir).map_err(|e| StudyError::io(dir, e))
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("study types serialize");
    out.push(b'\n');
    out
}

pub(crate) fn csv_bytes(rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(row).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

/// Ranks, correlates and groups a finished battery, writing
/// `table3_mode_ranks.csv`, `corr_matrix.csv` and `groups.json` into `dir`.
pub fn write_outputs(
    store: &BatteryStore,
    threshold: f64,
    dir: &Path,
) -> Result<(RankTable, CorrelationMatrix, MetricGroups), StudyError> {
    let table = store.mode_ranks()?;
    let matrix = rank_correlation(&table)?;
    let groups = group_metrics(&matrix, threshold)?;
    create_dir(dir)?;
    table.write_csv(&dir.join("table3_mode_ranks.csv"))?;
    matrix.write_csv(&dir.join("corr_matrix.csv"))?;
    groups.write_json(&dir.join("groups.json"))?;
    Ok((table, matrix, groups))
}
