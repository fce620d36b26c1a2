//! Randomized segmentor configurations.
//!
//! A [`SegmentorConfig`] describes one simulated segmentor as ranges to draw
//! from. The ten reference segmentors ship as `data/segmentors_table1.json`
//! and load through [`table1_segmentors`].
//!
//! JSON fields:
//!
//! | field | meaning |
//! |---|---|
//! | `id` | label used in tables and seeds |
//! | `description` | free text |
//! | `fd.detail` | fraction of descriptors kept |
//! | `fd.range` | fraction of the *kept* descriptors that get perturbed |
//! | `fd.magnitude` | perturbation scale |
//! | `resize` | a ratio, or `{"x": .., "y": ..}` |
//! | `shift_magnitude` | `[lo, hi]` shift length in pixels, `[0, 0]` for none |
//! | `spiculation_mode` | `none`, `outward`, `inward` or `mixture` |
//! | `spiculation_count` | `[lo, hi]` number of spiculations |
//! | `spiculation_center` | `[lo, hi)` center in degrees, `null` when unused |
//! | `spiculation_height` | `[lo, hi]` signed height in pixels |
//! | `spiculation_width` | `[lo, hi]` width in degrees |
//! | `stage_order` | optional engine order |

use serde::{Deserialize, Serialize};

use super::{check_finite, FdParams, Stage, SynthError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpiculationMode {
    None,
    Outward,
    Inward,
    Mixture,
}

/// Descriptor filter of a segmentor. Unlike [`FdParams`], `range` counts
/// relative to the kept descriptors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentorFd {
    pub detail: f64,
    pub range: f64,
    pub magnitude: f64,
}

impl SegmentorFd {
    pub fn params(&self) -> FdParams {
        FdParams {
            detail: self.detail,
            range: self.detail * self.range,
            magnitude: self.magnitude,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Resize {
    Uniform(f64),
    PerAxis { x: f64, y: f64 },
}

impl Resize {
    pub fn ratios(self) -> (f64, f64) {
        match self {
            Resize::Uniform(r) => (r, r),
            Resize::PerAxis { x, y } => (x, y),
        }
    }
}

impl Default for Resize {
    fn default() -> Self {
        Resize::Uniform(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentorConfig {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub fd: SegmentorFd,
    #[serde(default)]
    pub resize: Resize,
    #[serde(default)]
    pub shift_magnitude: [f64; 2],
    pub spiculation_mode: SpiculationMode,
    #[serde(default)]
    pub spiculation_count: [u32; 2],
    #[serde(default)]
    pub spiculation_center: Option<[f64; 2]>,
    #[serde(default)]
    pub spiculation_height: [f64; 2],
    #[serde(default)]
    pub spiculation_width: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage_order: Option<Vec<Stage>>,
}

/// The parsed shipped file.
const TABLE1_JSON: &str = include_str!("../../data/segmentors_table1.json");

pub fn table1_segmentors() -> Vec<SegmentorConfig> {
    serde_json::from_str(TABLE1_JSON).expect("shipped segmentor table is valid JSON")
}

fn ordered(field: &str, [lo, hi]: [f64; 2]) -> Result<(), SynthError> {
    check_finite(field, lo)?;
    check_finite(field, hi)?;
    if lo > hi {
        return Err(SynthError::invalid(
            field,
            format!("range [{lo}, {hi}] is reversed"),
        ));
    }
    Ok(())
}

impl SegmentorConfig {
    /// A segmentor that changes nothing.
    pub fn identity(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            description: String::new(),
            fd: SegmentorFd {
                detail: 1.0,
                range: 0.0,
                magnitude: 0.0,
            },
            resize: Resize::default(),
            shift_magnitude: [0.0, 0.0],
            spiculation_mode: SpiculationMode::None,
            spiculation_count: [0, 0],
            spiculation_center: None,
            spiculation_height: [0.0, 0.0],
            spiculation_width: [0.0, 0.0],
            stage_order: None,
        }
    }

    pub fn stages(&self) -> Vec<Stage> {
        self.stage_order
            .clone()
            .unwrap_or_else(|| Stage::DEFAULT_ORDER.to_vec())
    }

    /// Checks every range; errors name the offending field.
    pub fn validate(&self) -> Result<(), SynthError> {
        if !(0.0..=1.0).contains(&self.fd.range) {
            return Err(SynthError::invalid("fd.range", "must be in [0, 1]"));
        }
        self.fd.params().validate().map_err(|e| match e {
            SynthError::InvalidParameter { field, reason } => {
                SynthError::invalid(format!("fd.{field}"), reason)
            }
            other => other,
        })?;
        let (rx, ry) = self.resize.ratios();
        for v in [rx, ry] {
            check_finite("resize", v)?;
            if v <= 0.0 {
                return Err(SynthError::invalid("resize", "ratio must be > 0"));
            }
        }
        ordered("shift_magnitude", self.shift_magnitude)?;
        if self.shift_magnitude[0] < 0.0 {
            return Err(SynthError::invalid("shift_magnitude", "must be >= 0"));
        }
        if let Some(order) = &self.stage_order {
            let mut seen = Vec::new();
            for s in order {
                if seen.contains(s) {
                    return Err(SynthError::invalid(
                        "stage_order",
                        format!("{s} listed twice"),
                    ));
                }
                seen.push(*s);
            }
        }
        if self.spiculation_mode == SpiculationMode::None {
            return Ok(());
        }
        let [clo, chi] = self.spiculation_count;
        if clo > chi {
            return Err(SynthError::invalid(
                "spiculation_count",
                "range is reversed",
            ));
        }
        let center = self
            .spiculation_center
            .ok_or_else(|| SynthError::invalid("spiculation_center", "required for spiculation"))?;
        ordered("spiculation_center", center)?;
        ordered("spiculation_width", self.spiculation_width)?;
        if self.spiculation_width[0] <= 0.0 {
            return Err(SynthError::invalid("spiculation_width", "must be > 0"));
        }
        let h = self.spiculation_height;
        ordered("spiculation_height", h)?;
        match self.spiculation_mode {
            SpiculationMode::Outward if h[0] < 0.0 => Err(SynthError::invalid(
                "spiculation_height",
                "outward spiculation needs non-negative heights",
            )),
            SpiculationMode::Inward if h[1] > 0.0 => Err(SynthError::invalid(
                "spiculation_height",
                "inward spiculation needs non-positive heights",
            )),
            _ => Ok(()),
        }
    }
}
