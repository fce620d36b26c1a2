//! Gaussian spiculation in the polar view of a contour.
//!
//! Each point is expressed as `(rho, phi)` about the vertex centroid and its
//! radius becomes `rho + h * exp(-(d / w)^2)`, where `d` is the wrapped
//! angular difference between `phi` and the spiculation center `c`. Points
//! are moved along their own ray, so point count and ordering never change
//! and non star-shaped contours are handled point by point.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{check_finite, SynthError};
use crate::mask_io::{centroid, Contour, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub rho: f64,
    /// Angle in `[0, 2pi)`.
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarContour {
    pub center: Point,
    pub points: Vec<PolarPoint>,
}

impl PolarContour {
    pub fn to_cartesian(&self) -> Vec<Point> {
        self.points
            .iter()
            .map(|p| self.center + Point::new(p.phi.cos(), p.phi.sin()) * p.rho)
            .collect()
    }
}

/// One spiculation. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiculationParams {
    pub center: f64,
    /// Signed peak height in pixels; positive spikes outward.
    pub height: f64,
    pub width: f64,
}

impl SpiculationParams {
    /// Builds a spiculation with `center` normalized to `[0, 2pi)`.
    pub fn new(center: f64, height: f64, width: f64) -> Self {
        Self {
            center: normalize_angle(center),
            height,
            width,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        check_finite("center", self.center)?;
        check_finite("height", self.height)?;
        check_finite("width", self.width)?;
        if self.width <= 0.0 {
            return Err(SynthError::invalid("width", "must be > 0"));
        }
        Ok(())
    }
}

/// Maps an angle to `[0, 2pi)`.
pub(crate) fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Maps an angle difference to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = normalize_angle(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Radius change `G(phi)` for one spiculation.
pub fn spiculation_profile(phi: f64, params: &SpiculationParams) -> f64 {
    let d = wrap_angle(phi - params.center) / params.width;
    params.height * (-d * d).exp()
}

pub fn to_polar(contour: &Contour) -> Result<PolarContour, SynthError> {
    let center = centroid(contour);
    let points = contour
        .points()
        .iter()
        .enumerate()
        .map(|(index, &p)| {
            let d = p - center;
            let rho = d.norm();
            if rho == 0.0 {
                return Err(SynthError::PointAtCentroid { index });
            }
            Ok(PolarPoint {
                rho,
                phi: normalize_angle(d.y.atan2(d.x)),
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(PolarContour { center, points })
}

pub fn add_spiculation(
    contour: &Contour,
    params: &SpiculationParams,
) -> Result<Contour, SynthError> {
    params.validate()?;
    if params.height == 0.0 {
        return Ok(contour.clone());
    }
    let polar = to_polar(contour)?;
    let points = contour
        .points()
        .iter()
        .zip(&polar.points)
        .enumerate()
        .map(|(index, (&p, pp))| {
            let radius = pp.rho + spiculation_profile(pp.phi, params);
            if radius <= 0.0 {
                return Err(SynthError::CollapsedRadius { index, radius });
            }
            Ok(polar.center + (p - polar.center) * (radius / pp.rho))
        })
        .collect::<Result<_, _>>()?;
    Ok(Contour::new(points)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn regular(n: usize, r: f64, cx: f64, cy: f64) -> Contour {
        Contour::new(
            (0..n)
                .map(|k| {
                    let t = TAU * k as f64 / n as f64;
                    Point::new(cx + r * t.cos(), cy + r * t.sin())
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn polar_of_square() {
        let c = Contour::new(vec![
            Point::new(1., 1.),
            Point::new(-1., 1.),
            Point::new(-1., -1.),
            Point::new(1., -1.),
        ])
        .unwrap();
        let p = to_polar(&c).unwrap();
        let phis: Vec<f64> = p.points.iter().map(|q| q.phi).collect();
        for (got, want) in phis.iter().zip([1., 3., 5., 7.].map(|k| k * FRAC_PI_4)) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        for q in &p.points {
            assert_abs_diff_eq!(q.rho, 2f64.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn polar_of_point_on_positive_x_axis() {
        let c = Contour::new(vec![
            Point::new(2., 0.),
            Point::new(0., 2.),
            Point::new(-2., 0.),
            Point::new(0., -2.),
        ])
        .unwrap();
        let p = to_polar(&c).unwrap();
        assert_eq!(p.points[0], PolarPoint { rho: 2.0, phi: 0.0 });
    }

    #[test]
    fn regular_polygon_radii() {
        let p = to_polar(&regular(12, 5.0, 7.0, -3.0)).unwrap();
        for q in &p.points {
            assert_abs_diff_eq!(q.rho, 5.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn point_at_centroid_is_an_error() {
        let c = Contour::new(vec![
            Point::new(-1., 0.),
            Point::new(0., 0.),
            Point::new(1., 0.),
        ])
        .unwrap();
        assert!(matches!(
            to_polar(&c),
            Err(SynthError::PointAtCentroid { index: 1 })
        ));
    }

    #[test]
    fn zero_height_is_exact_identity() {
        let c = regular(9, 3.3, 1.1, 2.2);
        let out = add_spiculation(&c, &SpiculationParams::new(1.0, 0.0, 0.2)).unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn peak_and_one_width() {
        let c = regular(360, 20.0, 50.0, 50.0);
        let before = to_polar(&c).unwrap();
        let (center, h, w) = (before.points[40].phi, 7.5, before.points[10].phi);
        let out = add_spiculation(&c, &SpiculationParams::new(center, h, w)).unwrap();
        let rho = |k: usize| out.points()[k].distance(before.center);
        assert_abs_diff_eq!(rho(40) - before.points[40].rho, h, epsilon = 1e-9);
        // point 50 sits one width (10 degrees) past the center
        assert_abs_diff_eq!(
            rho(50) - before.points[50].rho,
            h * (-1f64).exp(),
            epsilon = 1e-9
        );
        assert_eq!(out.len(), c.len());
    }

    #[test]
    fn wraps_across_zero() {
        assert_abs_diff_eq!(wrap_angle(TAU - 0.1), -0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-TAU + 0.1), 0.1, epsilon = 1e-12);
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        let p = SpiculationParams::new(0.05, 1.0, 0.1);
        assert_abs_diff_eq!(
            spiculation_profile(TAU - 0.05, &p),
            spiculation_profile(0.15, &p),
            epsilon = 1e-12
        );
    }

    #[test]
    fn collapse_names_the_point() {
        let c = regular(8, 2.0, 10.0, 10.0);
        let err = add_spiculation(&c, &SpiculationParams::new(0.0, -5.0, 0.3)).unwrap_err();
        assert!(
            matches!(err, SynthError::CollapsedRadius { index: 0, .. }),
            "{err}"
        );
    }

    #[test]
    fn width_must_be_positive() {
        let c = regular(8, 2.0, 10.0, 10.0);
        assert!(add_spiculation(&c, &SpiculationParams::new(0.0, 1.0, 0.0)).is_err());
    }

    proptest! {
        #[test]
        fn negligible_beyond_four_widths(
            c in 0.0f64..TAU,
            h in -30.0f64..30.0,
            w in 0.01f64..0.7,
            t in 0.0f64..1.0,
        ) {
            // angle offsets with |d| in (4w, pi]
            let lo = 4.0 * w;
            prop_assume!(lo < PI);
            let d = lo + (PI - lo) * t + 1e-9;
            prop_assume!(d <= PI);
            let p = SpiculationParams::new(c, h, w);
            for phi in [c + d, c - d] {
                prop_assert!(spiculation_profile(phi, &p).abs() < h.abs() * (-16f64).exp() + 1e-300);
            }
        }

        #[test]
        fn wrapped_angle_in_half_open_interval(a in -100.0f64..100.0) {
            let r = wrap_angle(a);
            prop_assert!(r > -PI && r <= PI);
            prop_assert!(((a - r) / TAU - ((a - r) / TAU).round()).abs() < 1e-9);
        }
    }
}
