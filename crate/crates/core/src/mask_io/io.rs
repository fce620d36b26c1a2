//! Mask files (binary PGM and 8-bit grayscale PNG) and the plain-text contour
//! format (one `x,y` pair per line, closed implicitly).

use std::fmt::Write as _;
use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat};
use serde::{Deserialize, Serialize};

use super::{BinaryMask, Contour, MaskError, Point};

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskFormat {
    Pgm,
    Png,
}

impl MaskFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MaskFormat::Pgm => "pgm",
            MaskFormat::Png => "png",
        }
    }

    pub fn mime(self) -> &'static str {
        match self {
            MaskFormat::Pgm => "image/x-portable-graymap",
            MaskFormat::Png => "image/png",
        }
    }

    pub fn sniff(bytes: &[u8]) -> Option<MaskFormat> {
        if bytes.starts_with(b"P5") {
            Some(MaskFormat::Pgm)
        } else if bytes.starts_with(PNG_MAGIC) {
            Some(MaskFormat::Png)
        } else {
            None
        }
    }
}

/// Reads a mask file; pixels with intensity `> threshold` become foreground.
pub fn load_mask(path: impl AsRef<Path>, threshold: u8) -> Result<BinaryMask, MaskError> {
    load_mask_with_format(path, threshold).map(|(m, _)| m)
}

pub fn load_mask_with_format(
    path: impl AsRef<Path>,
    threshold: u8,
) -> Result<(BinaryMask, MaskFormat), MaskError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| MaskError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_mask(&bytes, threshold)
}

pub fn decode_mask(bytes: &[u8], threshold: u8) -> Result<(BinaryMask, MaskFormat), MaskError> {
    let format = MaskFormat::sniff(bytes).ok_or_else(|| {
        MaskError::UnsupportedFormat("expected a binary PGM (P5) or PNG file".into())
    })?;
    let image_format = match format {
        MaskFormat::Pgm => ImageFormat::Pnm,
        MaskFormat::Png => ImageFormat::Png,
    };
    let img = image::load_from_memory_with_format(bytes, image_format)
        .map_err(|e| MaskError::UnsupportedFormat(e.to_string()))?;
    let gray = match img {
        DynamicImage::ImageLuma8(g) => g,
        other => {
            return Err(MaskError::UnsupportedFormat(format!(
                "expected 8-bit single-channel pixels, found {:?}",
                other.color()
            )))
        }
    };
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    let data = gray.into_raw().into_iter().map(|v| v > threshold).collect();
    Ok((BinaryMask::from_vec(w, h, data)?, format))
}

/// Encodes foreground as 255 and background as 0.
pub fn encode_mask(mask: &BinaryMask, format: MaskFormat) -> Result<Vec<u8>, MaskError> {
    let pixels: Vec<u8> = mask
        .data()
        .iter()
        .map(|&v| if v { 255 } else { 0 })
        .collect();
    match format {
        MaskFormat::Pgm => {
            let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
            out.extend_from_slice(&pixels);
            Ok(out)
        }
        MaskFormat::Png => {
            let img = image::GrayImage::from_raw(mask.width() as u32, mask.height() as u32, pixels)
                .expect("buffer matches dimensions");
            let mut out = Cursor::new(Vec::new());
            img.write_to(&mut out, ImageFormat::Png)
                .map_err(|e| MaskError::UnsupportedFormat(e.to_string()))?;
            Ok(out.into_inner())
        }
    }
}

pub fn save_mask(
    mask: &BinaryMask,
    path: impl AsRef<Path>,
    format: MaskFormat,
) -> Result<(), MaskError> {
    let path = path.as_ref();
    fs::write(path, encode_mask(mask, format)?).map_err(|source| MaskError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_contour(contour: &Contour) -> String {
    let mut out = String::new();
    for p in contour.points() {
        let _ = writeln!(out, "{},{}", p.x, p.y);
    }
    out
}

pub fn parse_contour(text: &str) -> Result<Contour, MaskError> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: &str| MaskError::ContourParse {
            line: i + 1,
            reason: reason.to_string(),
        };
        let (x, y) = line.split_once(',').ok_or_else(|| err("expected `x,y`"))?;
        let x: f64 = x.trim().parse().map_err(|_| err("invalid x"))?;
        let y: f64 = y.trim().parse().map_err(|_| err("invalid y"))?;
        points.push(Point::new(x, y));
    }
    Contour::new(points)
}

pub fn read_contour(path: impl AsRef<Path>) -> Result<Contour, MaskError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| MaskError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_contour(&text)
}
