//! Synthetic segmentation errors, segmentation metrics and metric-ranking
//! studies.

pub mod contour_synth;
pub mod mask_io;
pub mod metrics;
pub mod study;
