use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use super::MaskError;

/// A sub-pixel position in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Traversal direction of a closed contour, judged by the sign of the
/// shoelace area computed on the raw `(x, y)` coordinates. Positive area is
/// counter-clockwise with respect to the coordinate axes; because image `y`
/// points down, such a contour appears clockwise when drawn on screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
    /// Zero enclosed area (e.g. a traced one-pixel-wide line).
    Collinear,
}

/// An ordered, implicitly closed sequence of at least three points with no
/// two consecutive points equal (the last point connects back to the first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Contour {
    points: Vec<Point>,
    orientation: Orientation,
}

impl Contour {
    pub fn new(points: Vec<Point>) -> Result<Self, MaskError> {
        if points.len() < 3 {
            return Err(MaskError::DegenerateContour(format!(
                "{} point(s); at least 3 are required",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(MaskError::DegenerateContour(format!(
                "point {i} is not finite"
            )));
        }
        let n = points.len();
        if let Some(i) = (0..n).find(|&i| points[i] == points[(i + 1) % n]) {
            return Err(MaskError::DegenerateContour(format!(
                "points {i} and {} coincide at ({}, {})",
                (i + 1) % n,
                points[i].x,
                points[i].y
            )));
        }
        let area = signed_area(&points);
        let orientation = if area > 0.0 {
            Orientation::CounterClockwise
        } else if area < 0.0 {
            Orientation::Clockwise
        } else {
            Orientation::Collinear
        };
        Ok(Self {
            points,
            orientation,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; a contour holds at least three points.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Shoelace area; positive for [`Orientation::CounterClockwise`].
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    /// Same points, opposite traversal direction, same starting point.
    pub fn reversed(&self) -> Contour {
        let mut pts = self.points.clone();
        pts[1..].reverse();
        Contour::new(pts).expect("reversal preserves validity")
    }

    pub fn translated(&self, d: Point) -> Contour {
        Contour::new(self.points.iter().map(|&p| p + d).collect())
            .expect("translation preserves validity")
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }
}

impl TryFrom<Vec<Point>> for Contour {
    type Error = MaskError;
    fn try_from(points: Vec<Point>) -> Result<Self, MaskError> {
        Contour::new(points)
    }
}

impl From<Contour> for Vec<Point> {
    fn from(c: Contour) -> Self {
        c.points
    }
}

fn signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let a = points[i];
            let b = points[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum();
    twice / 2.0
}

/// Vertex centroid: the arithmetic mean of the contour points (not the area
/// centroid of the enclosed region).
pub fn centroid(contour: &Contour) -> Point {
    let n = contour.len() as f64;
    let (sx, sy) = contour
        .points()
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point::new(sx / n, sy / n)
}
