//! Run-length encoded masks for JSON payloads.

use serde::{Deserialize, Serialize};

use segsynth::mask_io::{BinaryMask, MaskError};

/// Row-major runs of alternating labels, starting with background. The
/// first run is zero when the first pixel is foreground.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RleMask {
    pub width: usize,
    pub height: usize,
    pub runs: Vec<u32>,
}

impl RleMask {
    pub fn encode(mask: &BinaryMask) -> Self {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0u32;
        for &v in mask.data() {
            if v == current {
                len += 1;
            } else {
                runs.push(len);
                current = v;
                len = 1;
            }
        }
        runs.push(len);
        Self {
            width: mask.width(),
            height: mask.height(),
            runs,
        }
    }

    pub fn decode(&self) -> Result<BinaryMask, MaskError> {
        let mut data = Vec::with_capacity(self.width * self.height);
        let mut value = false;
        for &run in &self.runs {
            data.extend(std::iter::repeat_n(value, run as usize));
            value = !value;
        }
        BinaryMask::from_vec(self.width, self.height, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encodes_with_leading_background_run() {
        let m = BinaryMask::from_ascii(&["##..", "..##"]).unwrap();
        let rle = RleMask::encode(&m);
        assert_eq!(rle.runs, [0, 2, 4, 2]);
        assert_eq!(rle.decode().unwrap(), m);
        let blank = BinaryMask::new(3, 2).unwrap();
        assert_eq!(RleMask::encode(&blank).runs, [6]);
    }

    #[test]
    fn wrong_total_is_rejected() {
        let rle = RleMask {
            width: 2,
            height: 2,
            runs: vec![1, 1],
        };
        assert!(rle.decode().is_err());
    }
}
