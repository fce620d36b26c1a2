//! Composition of the engines into a segmentor.
//!
//! [`apply_engines`] runs concrete parameters over a contour. [`synthesize`]
//! draws those parameters from a [`SegmentorConfig`] and then rasterizes the
//! result into the truth frame.
//!
//! Draw order for one `synthesize` call:
//!
//! 1. spiculation count, then for each spiculation its center, (for
//!    `mixture`: a sign coin), height magnitude or height, and width;
//! 2. shift direction in `[0, 2pi)` then shift length, only when the shift
//!    range is not `[0, 0]`;
//! 3. `r` then `s` for each perturbed Fourier descriptor.

use serde::{Deserialize, Serialize};

use super::{
    add_spiculation, affine_transform, from_fourier, modify_fd, to_fourier, AffineParams, FdParams,
    FdPerturbation, SeededRng, SegmentorConfig, SpiculationMode, SpiculationParams, Stage,
    SynthError,
};
use crate::mask_io::{extract_contour, rasterize, BinaryMask, Contour};

/// Concrete engine settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    #[serde(default)]
    pub fd: FdParams,
    #[serde(default)]
    pub spiculations: Vec<SpiculationParams>,
    #[serde(default)]
    pub affine: AffineParams,
    #[serde(default = "default_order")]
    pub stage_order: Vec<Stage>,
}

fn default_order() -> Vec<Stage> {
    Stage::DEFAULT_ORDER.to_vec()
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            fd: FdParams::default(),
            spiculations: Vec::new(),
            affine: AffineParams::default(),
            stage_order: default_order(),
        }
    }
}

impl EngineParams {
    /// Validates everything and reports all offending fields at once.
    pub fn validate(&self) -> Result<(), Vec<SynthError>> {
        let mut errors = Vec::new();
        let mut push = |prefix: &str, r: Result<(), SynthError>| {
            if let Err(e) = r {
                errors.push(match e {
                    SynthError::InvalidParameter { field, reason } => {
                        SynthError::invalid(format!("{prefix}{field}"), reason)
                    }
                    other => other,
                });
            }
        };
        push("fd.", self.fd.validate());
        for (i, s) in self.spiculations.iter().enumerate() {
            push(&format!("spiculations[{i}]."), s.validate());
        }
        push("affine.", self.affine.validate());
        for (i, s) in self.stage_order.iter().enumerate() {
            if self.stage_order[..i].contains(s) {
                push(
                    "",
                    Err(SynthError::invalid(
                        "stage_order",
                        format!("{s} listed twice"),
                    )),
                );
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}

/// What the engines did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineTrace {
    pub stage_order: Vec<Stage>,
    pub fd_descriptors: usize,
    pub fd_kept: usize,
    pub fd_perturbations: Vec<FdPerturbation>,
}

pub fn apply_engines(
    contour: &Contour,
    params: &EngineParams,
    rng: &mut SeededRng,
) -> Result<(Contour, EngineTrace), SynthError> {
    if let Err(mut errors) = params.validate() {
        return Err(errors.swap_remove(0));
    }
    let mut trace = EngineTrace {
        stage_order: params.stage_order.clone(),
        fd_descriptors: 0,
        fd_kept: 0,
        fd_perturbations: Vec::new(),
    };
    let mut current = contour.clone();
    for &stage in &params.stage_order {
        let name = stage.name();
        current = match stage {
            Stage::Fourier => {
                let fds = to_fourier(&current);
                let m = modify_fd(&fds, &params.fd, rng).map_err(|e| e.at(name))?;
                trace.fd_descriptors = fds.len();
                trace.fd_kept = m.selection.kept.len();
                let identity = m.is_identity();
                trace.fd_perturbations = m.perturbations;
                if identity {
                    current
                } else {
                    from_fourier(&m.descriptors, current.len()).map_err(|e| e.at(name))?
                }
            }
            Stage::Spiculation => {
                let mut c = current;
                for s in &params.spiculations {
                    c = add_spiculation(&c, s).map_err(|e| e.at(name))?;
                }
                c
            }
            Stage::Affine => affine_transform(&current, &params.affine).map_err(|e| e.at(name))?,
        };
    }
    Ok((current, trace))
}

/// One spiculation as drawn, in the config's units (degrees for angles).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiculationDraw {
    pub center_deg: f64,
    pub height: f64,
    pub width_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftDraw {
    /// Radians in image coordinates.
    pub direction: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Draws {
    pub spiculations: Vec<SpiculationDraw>,
    pub shift: Option<ShiftDraw>,
}

/// Everything needed to audit or replay one synthesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub config: SegmentorConfig,
    pub draws: Draws,
    pub engine: EngineParams,
    pub trace: EngineTrace,
    pub truth_contour_points: usize,
    pub truth_area: usize,
    pub synthetic_area: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub mask: BinaryMask,
    pub contour: Contour,
    pub provenance: Provenance,
}

fn draw_height(config: &SegmentorConfig, rng: &mut SeededRng) -> f64 {
    let [lo, hi] = config.spiculation_height;
    match config.spiculation_mode {
        SpiculationMode::Mixture => {
            let outward = rng.coin();
            let (a, b) = (lo.abs(), hi.abs());
            let max = a.max(b);
            let min = if lo < 0.0 && hi > 0.0 { 0.0 } else { a.min(b) };
            let mag = rng.uniform(min, max);
            if outward {
                mag
            } else {
                -mag
            }
        }
        _ => rng.uniform(lo, hi),
    }
}

/// Draws the concrete engine settings for one run.
pub fn draw_engine_params(
    config: &SegmentorConfig,
    rng: &mut SeededRng,
) -> Result<(EngineParams, Draws), SynthError> {
    config.validate()?;
    let mut draws = Draws {
        spiculations: Vec::new(),
        shift: None,
    };
    let mut spiculations = Vec::new();
    if config.spiculation_mode != SpiculationMode::None {
        let [clo, chi] = config.spiculation_count;
        let [c0, c1] = config
            .spiculation_center
            .expect("validated config has a spiculation center");
        let [w0, w1] = config.spiculation_width;
        for _ in 0..rng.uniform_int(clo, chi) {
            let center_deg = rng.uniform(c0, c1);
            let height = draw_height(config, rng);
            let width_deg = rng.uniform(w0, w1);
            draws.spiculations.push(SpiculationDraw {
                center_deg,
                height,
                width_deg,
            });
            spiculations.push(SpiculationParams::new(
                center_deg.to_radians(),
                height,
                width_deg.to_radians(),
            ));
        }
    }
    let (resize_x, resize_y) = config.resize.ratios();
    let mut affine = AffineParams {
        resize_x,
        resize_y,
        ..AffineParams::default()
    };
    let [slo, shi] = config.shift_magnitude;
    if shi > 0.0 {
        let direction = rng.uniform(0.0, std::f64::consts::TAU);
        let length = rng.uniform(slo, shi);
        affine.shift_dx = length * direction.cos();
        affine.shift_dy = length * direction.sin();
        draws.shift = Some(ShiftDraw { direction, length });
    }
    let params = EngineParams {
        fd: config.fd.params(),
        spiculations,
        affine,
        stage_order: config.stages(),
    };
    Ok((params, draws))
}

/// Emulates one segmentation of `truth`. Equal inputs give bit-identical
/// output.
pub fn synthesize(
    truth: &BinaryMask,
    config: &SegmentorConfig,
    seed: u64,
) -> Result<Synthesis, SynthError> {
    let mut rng = SeededRng::new(seed);
    let (engine, draws) = draw_engine_params(config, &mut rng)?;
    let truth_contour = extract_contour(truth).map_err(|e| SynthError::from(e).at("extract"))?;
    let (contour, trace) = apply_engines(&truth_contour, &engine, &mut rng)?;
    let mask = rasterize(&contour, truth.width(), truth.height())
        .map_err(|e| SynthError::from(e).at("rasterize"))?;
    let provenance = Provenance {
        seed,
        config: config.clone(),
        draws,
        engine,
        trace,
        truth_contour_points: truth_contour.len(),
        truth_area: truth.foreground_count(),
        synthetic_area: mask.foreground_count(),
    };
    Ok(Synthesis {
        mask,
        contour,
        provenance,
    })
}
