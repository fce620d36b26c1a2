//! Resize, rotate and shift a contour.

use serde::{Deserialize, Serialize};

use super::{check_finite, SynthError};
use crate::mask_io::{centroid, Contour, Point};

/// Resize ratios apply along the image axes about the vertex centroid,
/// followed by a rotation (radians, counter-clockwise in image coordinates)
/// about the same centroid, followed by the shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AffineParams {
    pub resize_x: f64,
    pub resize_y: f64,
    pub shift_dx: f64,
    pub shift_dy: f64,
    pub rotate: f64,
}

impl Default for AffineParams {
    fn default() -> Self {
        Self {
            resize_x: 1.0,
            resize_y: 1.0,
            shift_dx: 0.0,
            shift_dy: 0.0,
            rotate: 0.0,
        }
    }
}

impl AffineParams {
    pub fn resize(ratio: f64) -> Self {
        Self {
            resize_x: ratio,
            resize_y: ratio,
            ..Self::default()
        }
    }

    pub fn shift(dx: f64, dy: f64) -> Self {
        Self {
            shift_dx: dx,
            shift_dy: dy,
            ..Self::default()
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::default()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        for (field, v) in [
            ("resize_x", self.resize_x),
            ("resize_y", self.resize_y),
            ("shift_dx", self.shift_dx),
            ("shift_dy", self.shift_dy),
            ("rotate", self.rotate),
        ] {
            check_finite(field, v)?;
        }
        for (field, v) in [("resize_x", self.resize_x), ("resize_y", self.resize_y)] {
            if v <= 0.0 {
                return Err(SynthError::invalid(field, "resize ratio must be > 0"));
            }
        }
        Ok(())
    }
}

pub fn affine_transform(contour: &Contour, params: &AffineParams) -> Result<Contour, SynthError> {
    params.validate()?;
    if params.is_identity() {
        return Ok(contour.clone());
    }
    let c = centroid(contour);
    let (sin, cos) = params.rotate.sin_cos();
    let shift = Point::new(params.shift_dx, params.shift_dy);
    let points = contour
        .points()
        .iter()
        .map(|&p| {
            let d = p - c;
            let (x, y) = (d.x * params.resize_x, d.y * params.resize_y);
            c + Point::new(x * cos - y * sin, x * sin + y * cos) + shift
        })
        .collect();
    Ok(Contour::new(points)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn square() -> Contour {
        Contour::new(vec![
            Point::new(0., 0.),
            Point::new(1., 0.),
            Point::new(1., 1.),
            Point::new(0., 1.),
        ])
        .unwrap()
    }

    #[test]
    fn identity_is_exact() {
        let c = Contour::new(vec![
            Point::new(0.1, 0.7),
            Point::new(3.3, 0.2),
            Point::new(2.9, 4.1),
        ])
        .unwrap();
        assert_eq!(affine_transform(&c, &AffineParams::default()).unwrap(), c);
    }

    #[test]
    fn doubling_doubles_distance_to_centroid() {
        let c = square();
        let out = affine_transform(&c, &AffineParams::resize(2.0)).unwrap();
        let (c0, c1) = (centroid(&c), centroid(&out));
        assert_abs_diff_eq!(c0.x, c1.x, epsilon = 1e-12);
        assert_abs_diff_eq!(c0.y, c1.y, epsilon = 1e-12);
        for (p, q) in c.points().iter().zip(out.points()) {
            assert_abs_diff_eq!(q.distance(c1), 2.0 * p.distance(c0), epsilon = 1e-12);
        }
    }

    #[test]
    fn shift_translates_every_point() {
        let c = square();
        let out = affine_transform(&c, &AffineParams::shift(3.0, -4.0)).unwrap();
        for (p, q) in c.points().iter().zip(out.points()) {
            assert_eq!(*q - *p, Point::new(3.0, -4.0));
        }
        let d = centroid(&out) - centroid(&c);
        assert_abs_diff_eq!(d.x, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.y, -4.0, epsilon = 1e-12);
    }

    #[test]
    fn quarter_turn() {
        let p = AffineParams {
            rotate: std::f64::consts::FRAC_PI_2,
            ..Default::default()
        };
        let out = affine_transform(&square(), &p).unwrap();
        // (0,0) relative to centroid (0.5,0.5) is (-0.5,-0.5) -> (0.5,-0.5)
        assert_abs_diff_eq!(out.points()[0].x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.points()[0].y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bad_params_rejected() {
        let c = square();
        for p in [
            AffineParams::resize(0.0),
            AffineParams::resize(-1.0),
            AffineParams::shift(f64::NAN, 0.0),
            AffineParams {
                rotate: f64::INFINITY,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                affine_transform(&c, &p),
                Err(SynthError::InvalidParameter { .. })
            ));
        }
    }

    proptest! {
        #[test]
        fn resizes_compose(
            a in 0.2f64..5.0,
            b in 0.2f64..5.0,
            pts in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..20),
        ) {
            let c = match Contour::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()) {
                Ok(c) => c,
                Err(_) => return Ok(()),
            };
            let twice = affine_transform(
                &affine_transform(&c, &AffineParams::resize(b)).unwrap(),
                &AffineParams::resize(a),
            ).unwrap();
            let once = affine_transform(&c, &AffineParams::resize(a * b)).unwrap();
            for (p, q) in twice.points().iter().zip(once.points()) {
                prop_assert!((p.x - q.x).abs() < 1e-9 && (p.y - q.y).abs() < 1e-9);
            }
        }
    }
}
