//! Fourier descriptors of a closed contour.
//!
//! Point `k` is the complex number `x_k + i y_k` and the descriptors are
//! `f(u) = (1/N) * sum_k p(k) exp(-2 pi i u k / N)`, so `f(0)` is the vertex
//! centroid. The inverse is the plain sum `p(k) = sum_u f(u) exp(2 pi i u k / N)`.
//!
//! Descriptors are ranked by absolute frequency: index `u` has signed
//! frequency `u` for `u <= N/2` and `u - N` otherwise, and the ranking is
//! `0, +1, -1, +2, -2, ...` with the `N/2` term of an even `N` last.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{check_finite, SeededRng, SynthError};
use crate::mask_io::{Contour, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct FourierDescriptors {
    coefficients: Vec<Complex64>,
}

impl FourierDescriptors {
    pub fn new(coefficients: Vec<Complex64>) -> Self {
        Self { coefficients }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn dc(&self) -> Complex64 {
        self.coefficients[0]
    }

    /// Number of descriptors that are not exactly zero.
    pub fn non_zero(&self) -> usize {
        self.coefficients
            .iter()
            .filter(|c| c.re != 0.0 || c.im != 0.0)
            .count()
    }
}

/// Detail, range and magnitude of the descriptor filter. `detail` and
/// `range` are fractions of the descriptor count `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdParams {
    pub detail: f64,
    pub range: f64,
    pub magnitude: f64,
}

impl Default for FdParams {
    /// Keeps every descriptor untouched.
    fn default() -> Self {
        Self {
            detail: 1.0,
            range: 0.0,
            magnitude: 0.0,
        }
    }
}

impl FdParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        check_finite("detail", self.detail)?;
        check_finite("range", self.range)?;
        check_finite("magnitude", self.magnitude)?;
        if !(self.detail > 0.0 && self.detail <= 1.0) {
            return Err(SynthError::invalid("detail", "must be in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.range) {
            return Err(SynthError::invalid("range", "must be in [0, 1]"));
        }
        if self.magnitude < 0.0 {
            return Err(SynthError::invalid("magnitude", "must be >= 0"));
        }
        Ok(())
    }
}

/// Which descriptor indices survive the filter and which get perturbed.
/// Both lists are in ranking order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FdSelection {
    pub n: usize,
    pub kept: Vec<usize>,
    pub perturbed: Vec<usize>,
}

/// The uniform draws for one descriptor; the applied change is
/// `(r * magnitude, s * magnitude)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdPerturbation {
    pub index: usize,
    pub frequency: i64,
    pub r: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedDescriptors {
    pub descriptors: FourierDescriptors,
    pub selection: FdSelection,
    pub magnitude: f64,
    pub perturbations: Vec<FdPerturbation>,
}

impl ModifiedDescriptors {
    /// True when the filter kept every descriptor and changed none.
    pub fn is_identity(&self) -> bool {
        self.selection.kept.len() == self.selection.n
            && (self.magnitude == 0.0 || self.perturbations.is_empty())
    }
}

pub fn signed_frequency(u: usize, n: usize) -> i64 {
    if u <= n / 2 {
        u as i64
    } else {
        u as i64 - n as i64
    }
}

/// Descriptor indices from lowest to highest absolute frequency.
pub fn frequency_order(n: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(n);
    if n == 0 {
        return order;
    }
    order.push(0);
    for f in 1..=n / 2 {
        order.push(f);
        if n - f != f {
            order.push(n - f);
        }
    }
    order
}

/// `round(x)` with halves going up. Products such as `0.35 * 10` land a hair
/// under the half, so values within 1e-9 of it count as the half.
fn round_half_up(x: f64) -> usize {
    (x + 0.5 + 1e-9).floor().max(0.0) as usize
}

pub fn select_descriptors(n: usize, params: &FdParams) -> Result<FdSelection, SynthError> {
    params.validate()?;
    let kept_count = round_half_up(params.detail * n as f64).clamp(1, n);
    if kept_count < 3 {
        return Err(SynthError::TooFewDescriptors { kept: kept_count });
    }
    let perturbed_count = round_half_up(params.range * n as f64).min(kept_count - 1);
    let kept: Vec<usize> = frequency_order(n).into_iter().take(kept_count).collect();
    let perturbed = kept[kept_count - perturbed_count..].to_vec();
    Ok(FdSelection { n, kept, perturbed })
}

pub fn to_fourier(contour: &Contour) -> FourierDescriptors {
    let n = contour.len();
    let mut buf: Vec<Complex64> = contour
        .points()
        .iter()
        .map(|p| Complex64::new(p.x, p.y))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    FourierDescriptors::new(buf)
}

/// Zeroes the high frequencies and perturbs the top of the kept band. The
/// DC term is never perturbed because the kept band always extends past it.
/// Draws `r` then `s` for each perturbed descriptor, in ranking order.
pub fn modify_fd(
    fds: &FourierDescriptors,
    params: &FdParams,
    rng: &mut SeededRng,
) -> Result<ModifiedDescriptors, SynthError> {
    let n = fds.len();
    let selection = select_descriptors(n, params)?;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for &u in &selection.kept {
        out[u] = fds.coefficients[u];
    }
    let m = params.magnitude;
    let mut perturbations = Vec::with_capacity(selection.perturbed.len());
    for &u in &selection.perturbed {
        let r = rng.uniform(-0.5, 0.5);
        let s = rng.uniform(-0.5, 0.5);
        out[u].re += r * m;
        out[u].im += s * m;
        perturbations.push(FdPerturbation {
            index: u,
            frequency: signed_frequency(u, n),
            r,
            s,
        });
    }
    Ok(ModifiedDescriptors {
        descriptors: FourierDescriptors::new(out),
        selection,
        magnitude: m,
        perturbations,
    })
}

/// Inverse transform at the descriptors' own length, without validation.
pub fn inverse_points(fds: &FourierDescriptors) -> Vec<Point> {
    let mut buf = fds.coefficients.clone();
    FftPlanner::new()
        .plan_fft_inverse(buf.len())
        .process(&mut buf);
    buf.into_iter().map(|c| Point::new(c.re, c.im)).collect()
}

/// Rebuilds a contour from descriptors. With `n_points` different from `N`
/// the curve is resampled by evaluating the signed-frequency series at
/// `n_points` equally spaced parameters.
pub fn from_fourier(fds: &FourierDescriptors, n_points: usize) -> Result<Contour, SynthError> {
    if n_points < 3 {
        return Err(SynthError::invalid("n_points", "must be >= 3"));
    }
    let n = fds.len();
    let points = if n_points == n {
        inverse_points(fds)
    } else {
        (0..n_points)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n_points as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for (u, &c) in fds.coefficients.iter().enumerate() {
                    if c.re != 0.0 || c.im != 0.0 {
                        acc += c * Complex64::from_polar(1.0, t * signed_frequency(u, n) as f64);
                    }
                }
                Point::new(acc.re, acc.im)
            })
            .collect()
    };
    Ok(Contour::new(points)?)
}
