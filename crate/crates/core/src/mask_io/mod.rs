//! Binary masks, closed contours and the conversions between them.
//!
//! Pixel `(x, y)` has its center at integer coordinates `(x, y)`; `x` grows to
//! the right and `y` grows downwards (row-major storage). Contours produced by
//! [`extract_contour`] pass through pixel centers, and [`rasterize`] treats a
//! pixel as foreground when its center lies inside or on the polygon.

mod geometry;
mod io;
mod raster;
mod trace;

pub use geometry::{centroid, Contour, Orientation, Point};
pub use io::{
    decode_mask, encode_mask, load_mask, load_mask_with_format, parse_contour, read_contour,
    save_mask, write_contour, MaskFormat,
};
pub use raster::{rasterize, ON_EDGE_EPS};
pub use trace::{boundary_pixels, extract_contour, largest_component};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum MaskError {
    #[error("failed to read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported mask format: {0}")]
    UnsupportedFormat(String),
    #[error("mask has a zero dimension ({width}x{height})")]
    ZeroDimension { width: usize, height: usize },
    #[error("mask data has {actual} entries, expected {expected}")]
    DataLength { expected: usize, actual: usize },
    #[error("mask is empty (no foreground pixels)")]
    EmptyMask,
    #[error(
        "largest foreground component has only {0} pixel(s); a closed contour needs at least 3"
    )]
    DegenerateComponent(usize),
    #[error("degenerate contour: {0}")]
    DegenerateContour(String),
    #[error("rasterized contour produced an empty mask (contour lies outside the frame)")]
    EmptyRaster,
    #[error("mask dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("contour line {line}: {reason}")]
    ContourParse { line: usize, reason: String },
}

/// A 2-D raster of foreground/background labels stored row-major.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BinaryMask({}x{}, {} foreground)",
            self.width,
            self.height,
            self.foreground_count()
        )?;
        if self.width * self.height <= 64 {
            for y in 0..self.height {
                f.write_str("\n")?;
                for x in 0..self.width {
                    f.write_str(if self.get(x, y) { "#" } else { "." })?;
                }
            }
        }
        Ok(())
    }
}

impl BinaryMask {
    /// An all-background mask.
    pub fn new(width: usize, height: usize) -> Result<Self, MaskError> {
        Self::from_vec(width, height, vec![false; width * height])
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<bool>) -> Result<Self, MaskError> {
        if width == 0 || height == 0 {
            return Err(MaskError::ZeroDimension { width, height });
        }
        if data.len() != width * height {
            return Err(MaskError::DataLength {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self, MaskError> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_vec(width, height, data)
    }

    /// Parses a picture made of `#` (foreground) and `.` (background) rows.
    /// Handy for small fixtures.
    pub fn from_ascii(rows: &[&str]) -> Result<Self, MaskError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(width * height);
        for row in rows {
            if row.len() != width {
                return Err(MaskError::DataLength {
                    expected: width,
                    actual: row.len(),
                });
            }
            data.extend(row.bytes().map(|b| b == b'#'));
        }
        Self::from_vec(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// True when the frame has no pixels, which [`BinaryMask`] never allows.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Like [`get`](Self::get) but out-of-frame coordinates read as background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.get(x as usize, y as usize)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value;
    }

    pub fn foreground_count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn has_foreground(&self) -> bool {
        self.data.iter().any(|&v| v)
    }

    /// Foreground pixel coordinates in row-major order.
    pub fn foreground_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Mean foreground pixel position, `None` for an empty mask.
    pub fn area_centroid(&self) -> Option<Point> {
        let (mut sx, mut sy, mut n) = (0u64, 0u64, 0u64);
        for (x, y) in self.foreground_pixels() {
            sx += x as u64;
            sy += y as u64;
            n += 1;
        }
        (n > 0).then(|| Point::new(sx as f64 / n as f64, sy as f64 / n as f64))
    }

    /// Adds background rows/columns around the frame. Foreground pixels keep
    /// their relative layout and move by `(left, top)`.
    pub fn pad(&self, top: usize, bottom: usize, left: usize, right: usize) -> BinaryMask {
        let width = self.width + left + right;
        let height = self.height + top + bottom;
        let mut out = vec![false; width * height];
        for y in 0..self.height {
            let src = &self.data[y * self.width..(y + 1) * self.width];
            let start = (y + top) * width + left;
            out[start..start + self.width].copy_from_slice(src);
        }
        BinaryMask {
            width,
            height,
            data: out,
        }
    }

    pub fn check_same_frame(&self, other: &BinaryMask) -> Result<(), MaskError> {
        if self.width != other.width || self.height != other.height {
            return Err(MaskError::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(
            BinaryMask::new(0, 3),
            Err(MaskError::ZeroDimension { .. })
        ));
        assert!(matches!(
            BinaryMask::from_vec(2, 2, vec![true; 3]),
            Err(MaskError::DataLength { .. })
        ));
    }

    #[test]
    fn pad_moves_foreground() {
        let m = BinaryMask::from_ascii(&["#.", ".#"]).unwrap();
        let p = m.pad(1, 2, 3, 0);
        assert_eq!((p.width(), p.height()), (5, 5));
        let fg: Vec<_> = p.foreground_pixels().collect();
        assert_eq!(fg, vec![(3, 1), (4, 2)]);
        assert_eq!(m.pad(0, 0, 0, 0), m);
    }

    #[test]
    fn area_centroid_of_block() {
        let m =
            BinaryMask::from_fn(5, 5, |x, y| (1..=3).contains(&x) && (1..=3).contains(&y)).unwrap();
        assert_eq!(m.area_centroid(), Some(Point::new(2.0, 2.0)));
        assert_eq!(BinaryMask::new(3, 3).unwrap().area_centroid(), None);
    }
}
