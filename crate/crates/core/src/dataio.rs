//! MNIST IDX ingestion and the 28x28 -> 14x14 reduction that produces the
//! 196-pixel input vectors.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fxp::{quantize, QFormat, QValue};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const MNIST_SIDE: usize = 28;
pub const FOLDED_SIDE: usize = 14;
pub const FOLDED_PIXELS: usize = FOLDED_SIDE * FOLDED_SIDE;
pub const NUM_CLASSES: u8 = 10;

const RAW_PIXELS: usize = MNIST_SIDE * MNIST_SIDE;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("wrong IDX magic: expected {expected:#010x}, found {found:#010x}")]
    WrongMagic { expected: u32, found: u32 },
    #[error("IDX data truncated: need {expected} bytes, have {actual}")]
    Truncated { expected: u128, actual: usize },
    #[error("IDX images are {rows}x{cols}, expected 28x28")]
    DimMismatch { rows: u32, cols: u32 },
    #[error("IDX file has {extra} unexpected trailing bytes")]
    TrailingBytes { extra: usize },
    #[error("label {value} at index {index} is not a digit class")]
    LabelOutOfRange { index: usize, value: u8 },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("pixel {pixel} of image {index} is outside [0, 1)")]
    PixelOutOfRange { index: usize, pixel: usize },
}

/// A 28x28 greyscale image, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RawImage(pub [u8; RAW_PIXELS]);

impl RawImage {
    pub fn pixel(&self, row: usize, col: usize) -> u8 {
        self.0[row * MNIST_SIDE + col]
    }
}

impl fmt::Debug for RawImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RawImage(sum={})", self.0.iter().map(|&p| p as u64).sum::<u64>())
    }
}

/// How a 2x2 block collapses to one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FoldMode {
    #[default]
    Average,
    Max,
    Subsample,
}

impl FromStr for FoldMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "average" | "avg" => Ok(FoldMode::Average),
            "max" => Ok(FoldMode::Max),
            "subsample" | "stride" => Ok(FoldMode::Subsample),
            other => Err(format!("unknown fold mode '{other}'")),
        }
    }
}

/// A 14x14 image with pixels in `[0, 1)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedImage([f64; FOLDED_PIXELS]);

impl FoldedImage {
    pub fn from_pixels(pixels: [f64; FOLDED_PIXELS]) -> Self {
        Self(pixels)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row * FOLDED_SIDE + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn read_u32(bytes: &[u8], at: usize) -> Option<u32> {
    bytes.get(at..at + 4).map(|b| u32::from_be_bytes(b.try_into().expect("4 bytes")))
}

fn header(bytes: &[u8], magic: u32, len: usize) -> Result<Vec<u32>, DataError> {
    let found = read_u32(bytes, 0).ok_or(DataError::Truncated { expected: 4, actual: bytes.len() })?;
    if found != magic {
        return Err(DataError::WrongMagic { expected: magic, found });
    }
    (0..len)
        .map(|i| {
            read_u32(bytes, 4 + 4 * i).ok_or(DataError::Truncated { expected: 4 + 4 * (len as u128 + 1), actual: bytes.len() })
        })
        .collect()
}

fn payload(bytes: &[u8], offset: usize, size: u128) -> Result<&[u8], DataError> {
    let expected = offset as u128 + size;
    if (bytes.len() as u128) < expected {
        return Err(DataError::Truncated { expected, actual: bytes.len() });
    }
    if (bytes.len() as u128) > expected {
        return Err(DataError::TrailingBytes { extra: (bytes.len() as u128 - expected) as usize });
    }
    Ok(&bytes[offset..])
}

/// Parses an IDX3 image file (magic `0x00000803`, dims `[count, 28, 28]`).
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<RawImage>, DataError> {
    let dims = header(bytes, IMAGE_MAGIC, 3)?;
    let (count, rows, cols) = (dims[0], dims[1], dims[2]);
    if rows as usize != MNIST_SIDE || cols as usize != MNIST_SIDE {
        return Err(DataError::DimMismatch { rows, cols });
    }
    let data = payload(bytes, 16, count as u128 * RAW_PIXELS as u128)?;
    Ok(data
        .chunks_exact(RAW_PIXELS)
        .map(|c| RawImage(c.try_into().expect("chunk of one image")))
        .collect())
}

/// Parses an IDX1 label file (magic `0x00000801`); every label must be 0..9.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, DataError> {
    let dims = header(bytes, LABEL_MAGIC, 1)?;
    let data = payload(bytes, 8, dims[0] as u128)?;
    if let Some((index, &value)) = data.iter().enumerate().find(|(_, &v)| v >= NUM_CLASSES) {
        return Err(DataError::LabelOutOfRange { index, value });
    }
    Ok(data.to_vec())
}

pub fn encode_idx_images(images: &[RawImage]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * RAW_PIXELS);
    for word in [IMAGE_MAGIC, images.len() as u32, MNIST_SIDE as u32, MNIST_SIDE as u32] {
        out.extend_from_slice(&word.to_be_bytes());
    }
    for img in images {
        out.extend_from_slice(&img.0);
    }
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

fn read_file(path: &Path) -> Result<Vec<u8>, DataError> {
    std::fs::read(path).map_err(|source| DataError::Io { path: path.display().to_string(), source })
}

pub fn load_idx_images(path: &Path) -> Result<Vec<RawImage>, DataError> {
    parse_idx_images(&read_file(path)?)
}

pub fn load_idx_labels(path: &Path) -> Result<Vec<u8>, DataError> {
    parse_idx_labels(&read_file(path)?)
}

/// 2x2 non-overlapping reduction (average by default), scaled by 1/256.
pub fn half_fold(img: &RawImage, mode: FoldMode) -> FoldedImage {
    let mut out = [0.0; FOLDED_PIXELS];
    for r in 0..FOLDED_SIDE {
        for c in 0..FOLDED_SIDE {
            let block = [
                img.pixel(2 * r, 2 * c),
                img.pixel(2 * r, 2 * c + 1),
                img.pixel(2 * r + 1, 2 * c),
                img.pixel(2 * r + 1, 2 * c + 1),
            ];
            out[r * FOLDED_SIDE + c] = match mode {
                FoldMode::Average => block.iter().map(|&p| p as u32).sum::<u32>() as f64 / 1024.0,
                FoldMode::Max => *block.iter().max().expect("four pixels") as f64 / 256.0,
                FoldMode::Subsample => block[0] as f64 / 256.0,
            };
        }
    }
    FoldedImage(out)
}

/// Row-major flatten, then quantize each pixel.
pub fn to_input_vector(img: &FoldedImage, fmt: QFormat) -> Vec<QValue> {
    img.0.iter().map(|&p| quantize(p, fmt).expect("pixels are finite")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDigest {
    pub path: String,
    pub sha256: String,
}

/// Folded images with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    images: Vec<FoldedImage>,
    labels: Vec<u8>,
    source_checksums: Vec<SourceDigest>,
}

impl Dataset {
    pub fn new(images: Vec<FoldedImage>, labels: Vec<u8>) -> Result<Self, DataError> {
        if images.len() != labels.len() {
            return Err(DataError::CountMismatch { images: images.len(), labels: labels.len() });
        }
        if let Some((index, &value)) = labels.iter().enumerate().find(|(_, &v)| v >= NUM_CLASSES) {
            return Err(DataError::LabelOutOfRange { index, value });
        }
        for (index, img) in images.iter().enumerate() {
            if let Some(pixel) = img.0.iter().position(|p| !(0.0..1.0).contains(p)) {
                return Err(DataError::PixelOutOfRange { index, pixel });
            }
        }
        Ok(Self { images, labels, source_checksums: Vec::new() })
    }

    pub fn from_raw(images: &[RawImage], labels: Vec<u8>, mode: FoldMode) -> Result<Self, DataError> {
        Self::new(images.iter().map(|img| half_fold(img, mode)).collect(), labels)
    }

    /// Loads a pair of IDX files, keeping at most `limit` samples.
    pub fn load(images: &Path, labels: &Path, mode: FoldMode, limit: Option<usize>) -> Result<Self, DataError> {
        let image_bytes = read_file(images)?;
        let label_bytes = read_file(labels)?;
        let raw = parse_idx_images(&image_bytes)?;
        let lab = parse_idx_labels(&label_bytes)?;
        if raw.len() != lab.len() {
            return Err(DataError::CountMismatch { images: raw.len(), labels: lab.len() });
        }
        let n = limit.map_or(raw.len(), |l| l.min(raw.len()));
        let mut ds = Self::from_raw(&raw[..n], lab[..n].to_vec(), mode)?;
        ds.source_checksums = vec![
            SourceDigest { path: images.display().to_string(), sha256: hex::encode(Sha256::digest(&image_bytes)) },
            SourceDigest { path: labels.display().to_string(), sha256: hex::encode(Sha256::digest(&label_bytes)) },
        ];
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[FoldedImage] {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn source_checksums(&self) -> &[SourceDigest] {
        &self.source_checksums
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FoldedImage, u8)> {
        self.images.iter().zip(self.labels.iter().copied())
    }

    /// Samples `start..start + len` (clamped).
    pub fn slice(&self, start: usize, len: usize) -> Dataset {
        let start = start.min(self.len());
        let end = (start + len).min(self.len());
        Dataset {
            images: self.images[start..end].to_vec(),
            labels: self.labels[start..end].to_vec(),
            source_checksums: self.source_checksums.clone(),
        }
    }
}
