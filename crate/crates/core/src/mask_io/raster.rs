//! Even-odd scanline fill of closed contours.
//!
//! Fill convention: pixel `(x, y)` is foreground when its center `(x, y)` is
//! inside the polygon under the even-odd rule, or lies exactly on one of its
//! edges. Edge crossings use the half-open rule (an edge spans rows with
//! `min(y) <= row < max(y)`), so vertices are never double counted.
//! Coordinates are used unrounded; everything outside the frame is clipped.
//! The on-edge test tolerates [`ON_EDGE_EPS`] of floating-point noise so that
//! contours reconstructed from Fourier descriptors keep their boundary pixels.

use super::{BinaryMask, Contour, MaskError, Point};

pub const ON_EDGE_EPS: f64 = 1e-9;

pub fn rasterize(contour: &Contour, width: usize, height: usize) -> Result<BinaryMask, MaskError> {
    let mut mask = BinaryMask::new(width, height)?;
    let pts = contour.points();
    let n = pts.len();
    let edges = || (0..n).map(move |i| (pts[i], pts[(i + 1) % n]));

    let mut crossings: Vec<f64> = Vec::new();
    for row in 0..height {
        let yc = row as f64;
        crossings.clear();
        for (a, b) in edges() {
            if (a.y <= yc) != (b.y <= yc) {
                let t = (yc - a.y) / (b.y - a.y);
                crossings.push(a.x + t * (b.x - a.x));
            }
        }
        crossings.sort_by(f64::total_cmp);
        for span in crossings.chunks_exact(2) {
            fill_span(&mut mask, row, span[0], span[1]);
        }
    }

    for (a, b) in edges() {
        mark_edge_centers(&mut mask, a, b);
    }

    if !mask.has_foreground() {
        return Err(MaskError::EmptyRaster);
    }
    Ok(mask)
}

fn fill_span(mask: &mut BinaryMask, row: usize, x0: f64, x1: f64) {
    let last = (mask.width() - 1) as f64;
    let lo = x0.ceil().max(0.0);
    let hi = x1.floor().min(last);
    if lo > hi {
        return;
    }
    for x in lo as usize..=hi as usize {
        mask.set(x, row, true);
    }
}

/// Marks pixels whose centers lie on segment `a`-`b`, within [`ON_EDGE_EPS`].
/// Walks the dominant axis so each candidate lattice point is visited once.
fn mark_edge_centers(mask: &mut BinaryMask, a: Point, b: Point) {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let horizontal = dx.abs() >= dy.abs();
    let (lo, hi) = if horizontal {
        (a.x.min(b.x), a.x.max(b.x))
    } else {
        (a.y.min(b.y), a.y.max(b.y))
    };
    let frame = if horizontal { w } else { h };
    let first = ((lo - ON_EDGE_EPS).ceil() as i64).max(0);
    let last = ((hi + ON_EDGE_EPS).floor() as i64).min(frame - 1);
    for major in first..=last {
        let m = major as f64;
        let t = if horizontal {
            (m - a.x) / dx
        } else {
            (m - a.y) / dy
        };
        let t = t.clamp(0.0, 1.0);
        let minor = if horizontal {
            a.y + t * dy
        } else {
            a.x + t * dx
        };
        let snapped = minor.round();
        if (minor - snapped).abs() > ON_EDGE_EPS {
            continue;
        }
        let (x, y) = if horizontal {
            (major, snapped as i64)
        } else {
            (snapped as i64, major)
        };
        if x < 0 || y < 0 || x >= w || y >= h {
            continue;
        }
        let on = Point::new(a.x + t * dx, a.y + t * dy);
        if on.distance(Point::new(x as f64, y as f64)) <= 2.0 * ON_EDGE_EPS {
            mask.set(x as usize, y as usize, true);
        }
    }
}
