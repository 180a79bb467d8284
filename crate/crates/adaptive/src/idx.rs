//! IDX image and label files.

use std::path::Path;

use crate::error::{AdaptiveError, Result};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// Flattened images scaled to `[0, 1]` with parity labels (odd = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: usize,
    pixels: Vec<f64>,
    digits: Vec<u8>,
}

impl Dataset {
    pub fn new(features: usize, pixels: Vec<f64>, digits: Vec<u8>) -> Result<Self> {
        if features == 0 || pixels.len() != features * digits.len() {
            return Err(AdaptiveError::CountMismatch {
                images: pixels.len().checked_div(features).unwrap_or(0),
                labels: digits.len(),
            });
        }
        Ok(Self {
            features,
            pixels,
            digits,
        })
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.pixels[i * self.features..(i + 1) * self.features]
    }

    pub fn digit(&self, i: usize) -> u8 {
        self.digits[i]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.digits[i] % 2
    }

    pub fn labels(&self) -> Vec<u8> {
        self.digits.iter().map(|d| d % 2).collect()
    }

    /// The first `n` samples.
    pub fn head(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            features: self.features,
            pixels: self.pixels[..n * self.features].to_vec(),
            digits: self.digits[..n].to_vec(),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| AdaptiveError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(AdaptiveError::Truncated {
            expected: at + 4,
            found: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<()> {
    let found = be_u32(bytes, 0)?;
    if found != expected {
        return Err(AdaptiveError::BadMagic { expected, found });
    }
    Ok(())
}

fn body(bytes: &[u8], header: usize, len: usize) -> Result<&[u8]> {
    bytes
        .get(header..header + len)
        .ok_or(AdaptiveError::Truncated {
            expected: header + len,
            found: bytes.len(),
        })
}

/// Parses an image file: `(count, rows * cols, pixels / 255)`.
pub fn parse_images(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>)> {
    check_magic(bytes, IMAGE_MAGIC)?;
    let n = be_u32(bytes, 4)? as usize;
    let features = be_u32(bytes, 8)? as usize * be_u32(bytes, 12)? as usize;
    let raw = body(bytes, 16, n * features)?;
    Ok((n, features, raw.iter().map(|&p| p as f64 / 255.0).collect()))
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABEL_MAGIC)?;
    let n = be_u32(bytes, 4)? as usize;
    Ok(body(bytes, 8, n)?.to_vec())
}

pub fn load_idx(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Dataset> {
    let (n, features, pixels) = parse_images(&read(images.as_ref())?)?;
    let digits = parse_labels(&read(labels.as_ref())?)?;
    if n != digits.len() {
        return Err(AdaptiveError::CountMismatch {
            images: n,
            labels: digits.len(),
        });
    }
    Dataset::new(features, pixels, digits)
}
