//! The twenty segmentation metrics.
//!
//! Count-based metrics come from [`ConfusionCounts`]; the rest need the
//! masks themselves. Every metric value is either a number or an explicit
//! [`MetricValue::Undefined`] with a reason, never NaN.
//!
//! Boundary-based metrics use [`boundary_pixels`](crate::mask_io::boundary_pixels):
//! foreground pixels 4-adjacent to background, with the frame edge counting
//! as background. That keeps them exactly invariant when the frame is padded.

mod counts;
mod distance;
mod report;

pub use counts::{confusion, count_metrics, ConfusionCounts};
pub use distance::{distance_metrics, hausdorff, mahalanobis, msi, squared_distance_transform};
pub use report::{Direction, Metric, MetricReport, MetricValue, UnknownMetric};

use serde::{Deserialize, Serialize};

use crate::mask_io::{BinaryMask, MaskError};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("confusion counts are all zero")]
    NoPixels,
    #[error("MSI tolerance must be finite and > 0, got {0}")]
    InvalidTolerance(f64),
    #[error(transparent)]
    Mask(#[from] MaskError),
}

/// Knobs of [`evaluate_all_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// MSI boundary tolerance in pixels.
    pub msi_tolerance: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { msi_tolerance: 1.0 }
    }
}

/// All twenty metrics with default options.
pub fn evaluate_all(truth: &BinaryMask, pred: &BinaryMask) -> Result<MetricReport, MetricsError> {
    evaluate_all_with(truth, pred, &EvalOptions::default())
}

pub fn evaluate_all_with(
    truth: &BinaryMask,
    pred: &BinaryMask,
    options: &EvalOptions,
) -> Result<MetricReport, MetricsError> {
    let mut report = count_metrics(&confusion(truth, pred)?)?;
    report.set(Metric::Msi, msi(truth, pred, options.msi_tolerance)?);
    report.merge(distance_metrics(truth, pred)?);
    Ok(report)
}
