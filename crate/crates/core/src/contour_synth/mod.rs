//! Synthesis engines that turn a truth contour into an emulated segmentation.
//!
//! Three engines operate on a [`Contour`](crate::mask_io::Contour):
//!
//! * [`affine_transform`]: resizing and rotation about the vertex centroid,
//!   then a shift.
//! * [`add_spiculation`]: a Gaussian bump added to the polar radius of each
//!   point, producing an outward (`h > 0`) or inward (`h < 0`) spike.
//! * [`modify_fd`]: low-pass filtering and random perturbation of the
//!   contour's Fourier descriptors.
//!
//! [`synthesize`] composes them for a randomized [`SegmentorConfig`] and
//! [`apply_engines`] for concrete [`EngineParams`].

mod affine;
mod fourier;
mod pipeline;
mod rng;
mod segmentor;
mod spiculation;

pub use affine::{affine_transform, AffineParams};
pub use fourier::{
    frequency_order, from_fourier, inverse_points, modify_fd, select_descriptors, signed_frequency,
    to_fourier, FdParams, FdPerturbation, FdSelection, FourierDescriptors, ModifiedDescriptors,
};
pub use pipeline::{
    apply_engines, draw_engine_params, synthesize, Draws, EngineParams, EngineTrace, Provenance,
    ShiftDraw, SpiculationDraw, Synthesis,
};
pub use rng::{derive_seed, SeededRng};
pub use segmentor::{table1_segmentors, Resize, SegmentorConfig, SegmentorFd, SpiculationMode};
pub use spiculation::{
    add_spiculation, spiculation_profile, to_polar, wrap_angle, PolarContour, PolarPoint,
    SpiculationParams,
};

use serde::{Deserialize, Serialize};

use crate::mask_io::MaskError;

/// One synthesis engine, as a pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Fourier,
    Spiculation,
    Affine,
}

impl Stage {
    /// Fourier descriptors first, then spiculation, then affine, so that the
    /// requested resize and shift are what the final mask shows.
    pub const DEFAULT_ORDER: [Stage; 3] = [Stage::Fourier, Stage::Spiculation, Stage::Affine];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Fourier => "fourier",
            Stage::Spiculation => "spiculation",
            Stage::Affine => "affine",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },
    #[error("contour point {index} coincides with the centroid")]
    PointAtCentroid { index: usize },
    #[error("spiculation collapses point {index} through the centroid (new radius {radius})")]
    CollapsedRadius { index: usize, radius: f64 },
    #[error("only {kept} Fourier descriptor(s) kept; at least 3 are needed")]
    TooFewDescriptors { kept: usize },
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<SynthError>,
    },
    #[error(transparent)]
    Mask(#[from] MaskError),
}

impl SynthError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        SynthError::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn at(self, stage: &'static str) -> Self {
        SynthError::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Name of the stage that failed, if known.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            SynthError::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub(crate) fn check_finite(field: &str, value: f64) -> Result<(), SynthError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(SynthError::invalid(field, "must be finite"))
    }
}
