//! Truth corpora: mask files on disk or generated convex shapes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::StudyError;
use crate::contour_synth::SeededRng;
use crate::mask_io::{load_mask, BinaryMask, MaskFormat};

/// Intensity threshold used when loading corpus masks (any non-zero pixel is foreground).
pub const DEFAULT_THRESHOLD: u8 = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patient {
    pub id: String,
    pub mask: BinaryMask,
}

/// Loads every `.png` and `.pgm` file of `dir`, sorted by file
/// name; the file stem is the patient id.
pub fn load_corpus(dir: &Path, threshold: u8) -> Result<Vec<Patient>, StudyError> {
    let entries = std::fs::read_dir(dir).map_err(|e| StudyError::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| StudyError::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        let known = [MaskFormat::Png, MaskFormat::Pgm].map(MaskFormat::extension);
        if ext.is_some_and(|e| known.contains(&e.as_str())) {
            paths.push(path);
        }
    }
    paths.sort();
    let mut patients = Vec::with_capacity(paths.len());
    for path in paths {
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| StudyError::parse(&path, "file name is not UTF-8"))?
            .to_string();
        patients.push(Patient {
            id,
            mask: load_mask(&path, threshold)?,
        });
    }
    if patients.is_empty() {
        return Err(StudyError::EmptyCorpus);
    }
    Ok(patients)
}

/// `count` filled, rotated ellipses in a `size`x`size` frame, ids
/// `"000"`, `"001"`, ...
///
/// Semi-axes are drawn in `[0.2, 0.28]·size` and the center within
/// `0.03·size` of the frame center. At `size = 128` the smallest radius
/// exceeds the deepest inward spiculation of the reference segmentors, and a
/// 20 px shift of a 10% enlarged shape stays inside the frame.
pub fn convex_truths(count: usize, size: usize, seed: u64) -> Vec<Patient> {
    let mut rng = SeededRng::new(seed);
    let s = size as f64;
    (0..count)
        .map(|i| {
            let a = rng.uniform(0.2 * s, 0.28 * s);
            let b = rng.uniform(0.2 * s, 0.28 * s);
            let theta = rng.uniform(0.0, std::f64::consts::PI);
            let cx = s / 2.0 + rng.uniform(-0.03 * s, 0.03 * s);
            let cy = s / 2.0 + rng.uniform(-0.03 * s, 0.03 * s);
            let (sin, cos) = theta.sin_cos();
            let mask = BinaryMask::from_fn(size, size, |x, y| {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                let u = dx * cos + dy * sin;
                let v = -dx * sin + dy * cos;
                (u / a).powi(2) + (v / b).powi(2) <= 1.0
            })
            .expect("size is non-zero");
            Patient {
                id: format!("{i:03}"),
                mask,
            }
        })
        .collect()
}
