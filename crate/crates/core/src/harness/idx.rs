//! IDX files: a big-endian `u32` magic (2051 images, 2049 labels), one
//! big-endian `u32` per dimension, then an unsigned-byte payload.

use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

const IMAGE_MAGIC: u32 = 2051;
const LABEL_MAGIC: u32 = 2049;

/// Grayscale images in `[0, 1]` with integer labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageSet {
    pub height: usize,
    pub width: usize,
    pub classes: usize,
    pub pixels: Vec<f64>,
    pub labels: Vec<usize>,
}

impl ImageSet {
    pub fn new(height: usize, width: usize, classes: usize, pixels: Vec<f64>, labels: Vec<usize>) -> Result<Self> {
        if pixels.len() != labels.len() * height * width {
            return Err(Error::Data(format!(
                "{} pixels do not form {} images of {height}×{width}",
                pixels.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::Data(format!("label {bad} outside [0, {classes})")));
        }
        Ok(Self {
            height,
            width,
            classes,
            pixels,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The selected images as an `N×1×H×W` tensor, with their labels.
    pub fn batch(&self, indices: &[usize]) -> Result<(Tensor, Vec<usize>)> {
        let size = self.height * self.width;
        let mut data = Vec::with_capacity(indices.len() * size);
        for &i in indices {
            data.extend_from_slice(&self.pixels[i * size..(i + 1) * size]);
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Ok((Tensor::from_vec(data, &[indices.len(), 1, self.height, self.width])?, labels))
    }

    /// Keeps the central `size×size` window of every image.
    pub fn center_crop(&self, size: usize) -> Result<Self> {
        if size == 0 || size > self.height || size > self.width {
            return Err(Error::Config(format!("cannot crop {}×{} images to {size}", self.height, self.width)));
        }
        let (top, left) = ((self.height - size) / 2, (self.width - size) / 2);
        let mut pixels = Vec::with_capacity(self.len() * size * size);
        for img in self.pixels.chunks(self.height * self.width) {
            for r in top..top + size {
                pixels.extend_from_slice(&img[r * self.width + left..r * self.width + left + size]);
            }
        }
        Self::new(size, size, self.classes, pixels, self.labels.clone())
    }

    /// Averages non-overlapping `factor×factor` blocks; trailing rows and
    /// columns that do not fill a block are dropped.
    pub fn downscale(&self, factor: usize) -> Result<Self> {
        let (h, w) = (self.height / factor.max(1), self.width / factor.max(1));
        if factor == 0 || h == 0 || w == 0 {
            return Err(Error::Config(format!("cannot downscale {}×{} images by {factor}", self.height, self.width)));
        }
        let area = (factor * factor) as f64;
        let mut pixels = Vec::with_capacity(self.len() * h * w);
        for img in self.pixels.chunks(self.height * self.width) {
            for r in 0..h {
                for c in 0..w {
                    let mut s = 0.0;
                    for dr in 0..factor {
                        for dc in 0..factor {
                            s += img[(r * factor + dr) * self.width + c * factor + dc];
                        }
                    }
                    pixels.push(s / area);
                }
            }
        }
        Self::new(h, w, self.classes, pixels, self.labels.clone())
    }
}

/// Header dimensions and payload of one IDX file.
fn parse<'a>(bytes: &'a [u8], magic: u32, what: &str) -> Result<(Vec<usize>, &'a [u8])> {
    let word = |i: usize| -> Result<u32> {
        bytes
            .get(4 * i..4 * i + 4)
            .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
            .ok_or_else(|| Error::Data(format!("{what} file: truncated header")))
    };
    let found = word(0)?;
    if found != magic {
        return Err(Error::Data(format!("{what} file: bad magic {found}, expected {magic}")));
    }
    let rank = if magic == IMAGE_MAGIC { 3 } else { 1 };
    let dims = (1..=rank).map(|i| word(i).map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
    let header = 4 * (rank + 1);
    let expected: usize = dims.iter().product();
    let payload = &bytes[header..];
    if payload.len() < expected {
        return Err(Error::Data(format!(
            "{what} file: truncated payload ({} of {expected} bytes)",
            payload.len()
        )));
    }
    Ok((dims, &payload[..expected]))
}

/// Parses in-memory IDX image and label files.
pub fn parse_idx(images: &[u8], labels: &[u8], classes: usize) -> Result<ImageSet> {
    let (idims, ipay) = parse(images, IMAGE_MAGIC, "image")?;
    let (ldims, lpay) = parse(labels, LABEL_MAGIC, "label")?;
    if idims[0] != ldims[0] {
        return Err(Error::Data(format!("{} images but {} labels", idims[0], ldims[0])));
    }
    let pixels = ipay.iter().map(|&b| b as f64 / 255.0).collect();
    let labels = lpay.iter().map(|&b| b as usize).collect();
    ImageSet::new(idims[1], idims[2], classes, pixels, labels)
}

/// Loads an image file and its label file, then applies the optional
/// center crop and downscale, in that order.
pub fn load_idx(
    images: &Path,
    labels: &Path,
    classes: usize,
    crop: Option<usize>,
    downscale: Option<usize>,
) -> Result<ImageSet> {
    let read = |p: &Path| std::fs::read(p).map_err(|e| Error::Data(format!("cannot read {}: {e}", p.display())));
    let mut set = parse_idx(&read(images)?, &read(labels)?, classes)?;
    if let Some(size) = crop {
        set = set.center_crop(size)?;
    }
    if let Some(f) = downscale {
        set = set.downscale(f)?;
    }
    Ok(set)
}

/// Encodes images (values in `[0, 1]`) and labels as IDX bytes.
pub fn encode_idx(set: &ImageSet) -> (Vec<u8>, Vec<u8>) {
    let mut images = Vec::new();
    for v in [IMAGE_MAGIC, set.len() as u32, set.height as u32, set.width as u32] {
        images.extend_from_slice(&v.to_be_bytes());
    }
    images.extend(set.pixels.iter().map(|&p| (p.clamp(0.0, 1.0) * 255.0).round() as u8));
    let mut labels = Vec::new();
    for v in [LABEL_MAGIC, set.len() as u32] {
        labels.extend_from_slice(&v.to_be_bytes());
    }
    labels.extend(set.labels.iter().map(|&l| l as u8));
    (images, labels)
}
