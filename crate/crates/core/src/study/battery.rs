//! The segmentor battery and its on-disk store.

use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    create_dir, mode_aggregate, rank_per_patient, to_json, write_file, Patient, RankTable,
    StudyError,
};
use crate::contour_synth::{derive_seed, synthesize, Provenance, SegmentorConfig};
use crate::mask_io::{centroid, extract_contour, Point};
use crate::metrics::{evaluate_all_with, EvalOptions, Metric, MetricReport, MetricValue};

/// Areas and centroids of a truth and its synthetic segmentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub truth_area: usize,
    pub synthetic_area: usize,
    /// Mean of the contour vertices.
    pub truth_vertex_centroid: Point,
    pub synthetic_vertex_centroid: Point,
    /// Mean of the foreground pixel centers.
    pub truth_area_centroid: Point,
    pub synthetic_area_centroid: Point,
}

impl CellGeometry {
    pub fn vertex_shift(&self) -> f64 {
        self.truth_vertex_centroid
            .distance(self.synthetic_vertex_centroid)
    }

    pub fn area_shift(&self) -> f64 {
        self.truth_area_centroid
            .distance(self.synthetic_area_centroid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum CellOutcome {
    Ok {
        report: MetricReport,
        geometry: CellGeometry,
        provenance: Provenance,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub patient: String,
    pub segmentor: String,
    pub seed: u64,
    #[serde(flatten)]
    pub outcome: CellOutcome,
}

impl Cell {
    pub fn report(&self) -> Option<&MetricReport> {
        match &self.outcome {
            CellOutcome::Ok { report, .. } => Some(report),
            CellOutcome::Failed { .. } => None,
        }
    }

    pub fn geometry(&self) -> Option<&CellGeometry> {
        match &self.outcome {
            CellOutcome::Ok { geometry, .. } => Some(geometry),
            CellOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub master_seed: u64,
    pub msi_tolerance: f64,
    pub patients: Vec<String>,
    pub segmentors: Vec<SegmentorConfig>,
    pub cells: usize,
    pub failed: usize,
}

/// All cells of one battery, patient-major in corpus and config order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryStore {
    pub manifest: Manifest,
    pub cells: Vec<Cell>,
}

fn check_unique<'a>(
    kind: &'static str,
    ids: impl Iterator<Item = &'a str>,
) -> Result<(), StudyError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(StudyError::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
    }
    Ok(())
}

fn run_cell(
    patient: &Patient,
    truth_centroid: Result<Point, String>,
    config: &SegmentorConfig,
    seed: u64,
    options: &EvalOptions,
) -> CellOutcome {
    let attempt = || -> Result<CellOutcome, String> {
        let truth_vertex_centroid = truth_centroid?;
        let synthesis = synthesize(&patient.mask, config, seed).map_err(|e| e.to_string())?;
        let report = evaluate_all_with(&patient.mask, &synthesis.mask, options)
            .map_err(|e| e.to_string())?;
        let area_centroid = |m: &crate::mask_io::BinaryMask| m.area_centroid().unwrap_or_default();
        let geometry = CellGeometry {
            truth_area: synthesis.provenance.truth_area,
            synthetic_area: synthesis.provenance.synthetic_area,
            truth_vertex_centroid,
            synthetic_vertex_centroid: centroid(&synthesis.contour),
            truth_area_centroid: area_centroid(&patient.mask),
            synthetic_area_centroid: area_centroid(&synthesis.mask),
        };
        Ok(CellOutcome::Ok {
            report,
            geometry,
            provenance: synthesis.provenance,
        })
    };
    attempt().unwrap_or_else(|error| CellOutcome::Failed { error })
}

/// Synthesizes and evaluates every (patient, segmentor) cell in parallel.
///
/// Each cell draws from its own stream seeded by
/// [`derive_seed`]`(master_seed, patient, segmentor)`, so results do not
/// depend on scheduling. A failing cell is recorded and the rest go on.
pub fn run_battery(
    corpus: &[Patient],
    configs: &[SegmentorConfig],
    master_seed: u64,
    options: &EvalOptions,
) -> Result<BatteryStore, StudyError> {
    if corpus.is_empty() {
        return Err(StudyError::EmptyCorpus);
    }
    if configs.is_empty() {
        return Err(StudyError::NoConfigs);
    }
    check_unique("patient", corpus.iter().map(|p| p.id.as_str()))?;
    check_unique("segmentor", configs.iter().map(|c| c.id.as_str()))?;

    let cells: Vec<Cell> = corpus
        .par_iter()
        .flat_map_iter(|patient| {
            let truth_centroid = extract_contour(&patient.mask)
                .map(|c| centroid(&c))
                .map_err(|e| format!("extract: {e}"));
            configs.iter().map(move |config| {
                let seed = derive_seed(master_seed, &patient.id, &config.id);
                Cell {
                    patient: patient.id.clone(),
                    segmentor: config.id.clone(),
                    seed,
                    outcome: run_cell(patient, truth_centroid.clone(), config, seed, options),
                }
            })
        })
        .collect();

    let failed = cells.iter().filter(|c| c.report().is_none()).count();
    if failed > 0 {
        tracing::warn!(failed, total = cells.len(), "battery cells failed");
    }
    Ok(BatteryStore {
        manifest: Manifest {
            master_seed,
            msi_tolerance: options.msi_tolerance,
            patients: corpus.iter().map(|p| p.id.clone()).collect(),
            segmentors: configs.to_vec(),
            cells: cells.len(),
            failed,
        },
        cells,
    })
}

impl BatteryStore {
    pub fn segmentor_ids(&self) -> Vec<String> {
        self.manifest
            .segmentors
            .iter()
            .map(|c| c.id.clone())
            .collect()
    }

    /// Cells of one segmentor, in patient order.
    pub fn cells_for<'a>(&'a self, segmentor: &'a str) -> impl Iterator<Item = &'a Cell> + 'a {
        self.cells.iter().filter(move |c| c.segmentor == segmentor)
    }

    /// Per-patient ranks aggregated by mode. Failed cells count as undefined
    /// for every metric and so rank last.
    pub fn mode_ranks(&self) -> Result<RankTable, StudyError> {
        let segmentors = self.segmentor_ids();
        let mut failed = MetricReport::new();
        for m in Metric::ALL {
            failed.set(m, MetricValue::undefined("cell failed"));
        }
        let mut per_patient = Vec::with_capacity(self.manifest.patients.len());
        for row in self.cells.chunks(segmentors.len()) {
            let reports: Vec<&MetricReport> =
                row.iter().map(|c| c.report().unwrap_or(&failed)).collect();
            per_patient.push(rank_per_patient(&reports, &segmentors)?);
        }
        mode_aggregate(&per_patient)
    }

    /// Writes `manifest.json` and `reports.json`.
    pub fn write(&self, dir: &Path) -> Result<(), StudyError> {
        create_dir(dir)?;
        write_file(&dir.join("manifest.json"), &to_json(&self.manifest))?;
        write_file(&dir.join("reports.json"), &to_json(&self.cells))
    }

    pub fn load(dir: &Path) -> Result<Self, StudyError> {
        let read = |name: &str| {
            let path = dir.join(name);
            let bytes = std::fs::read(&path).map_err(|e| StudyError::io(&path, e))?;
            Ok::<_, StudyError>((path, bytes))
        };
        let (path, bytes) = read("manifest.json")?;
        let manifest: Manifest =
            serde_json::from_slice(&bytes).map_err(|e| StudyError::parse(&path, e))?;
        let (path, bytes) = read("reports.json")?;
        let cells: Vec<Cell> =
            serde_json::from_slice(&bytes).map_err(|e| StudyError::parse(&path, e))?;
        let expected = manifest.patients.len() * manifest.segmentors.len();
        if cells.len() != expected || manifest.cells != expected {
            return Err(StudyError::parse(
                &path,
                format!("expected {expected} cells, found {}", cells.len()),
            ));
        }
        Ok(Self { manifest, cells })
    }
}
