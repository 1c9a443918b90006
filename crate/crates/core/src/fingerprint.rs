//! Averaged FFT noise spectra ("fingerprints") for downstream networks.
//!
//! Each of `crops` seeded 256×256 windows is reduced to a Gaussian-blur noise
//! residual, transformed under four shifts, and the magnitudes are averaged
//! per shift.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::{encode_png, fft2d_magnitude, gaussian_blur, jpeg_encode, Plane, RasterImage};
use crate::manipulation::keyed_rng;

pub const CROP_SIZE: usize = 256;
pub const DEFAULT_CROPS: usize = 256;
pub const RESIDUAL_SIGMA: f64 = 1.0;
pub const RESIDUAL_RADIUS: usize = 2;
/// (rows, cols) shift of each of the four planes.
pub const SHIFTS: [(usize, usize); 4] = [
    (0, 0),
    (CROP_SIZE / 2, 0),
    (0, CROP_SIZE / 2),
    (CROP_SIZE / 2, CROP_SIZE / 2),
];
pub const EXPORT_JPEG_QUALITY: u8 = 95;

/// Crops transformed per parallel batch; bounds peak memory.
const BATCH: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ShiftMode {
    /// Circular shift of the residual before the FFT. Magnitudes are
    /// shift-invariant, so the four planes coincide.
    #[default]
    Circular,
    /// Shift the crop window itself, wrapping inside the valid origin range.
    OffsetCrop,
}

impl fmt::Display for ShiftMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShiftMode::Circular => "circular",
            ShiftMode::OffsetCrop => "offset-crop",
        })
    }
}

impl FromStr for ShiftMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circular" => Ok(ShiftMode::Circular),
            "offset-crop" => Ok(ShiftMode::OffsetCrop),
            other => Err(Error::arg(format!("unknown shift mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExportFormat {
    #[default]
    Png,
    Jpeg,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Png => "png",
            ExportFormat::Jpeg => "jpg",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "png" => Ok(ExportFormat::Png),
            "jpg" | "jpeg" => Ok(ExportFormat::Jpeg),
            other => Err(Error::arg(format!("unknown export format `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FingerprintSet {
    /// One averaged magnitude plane per entry of [`SHIFTS`].
    pub planes: Vec<Plane>,
    pub shift_ids: [(usize, usize); 4],
    pub crop_count: usize,
    pub seed: u64,
    pub mode: ShiftMode,
}

/// `c − gaussian_blur(c)` for the grayscale 256×256 window at `origin`.
pub fn crop_residual(img: &RasterImage, origin: (usize, usize)) -> Result<Plane> {
    let (row, col) = origin;
    if row + CROP_SIZE > img.height() || col + CROP_SIZE > img.width() {
        return Err(Error::arg(format!(
            "crop at ({row},{col}) exceeds {}x{} image",
            img.width(),
            img.height()
        )));
    }
    let c = img.crop(row, col, CROP_SIZE, CROP_SIZE)?.to_grayscale();
    c.sub(&gaussian_blur(&c, RESIDUAL_SIGMA, RESIDUAL_RADIUS)?)
}

fn check_size(img: &RasterImage) -> Result<()> {
    if img.width() < CROP_SIZE || img.height() < CROP_SIZE {
        return Err(Error::arg(format!(
            "fingerprint needs at least a {CROP_SIZE}x{CROP_SIZE} image, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    Ok(())
}

/// Uniform seeded crop origins; crop `i` draws from its own keyed stream.
pub fn crop_origins(img: &RasterImage, crops: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    check_size(img)?;
    let (rows, cols) = (img.height() - CROP_SIZE + 1, img.width() - CROP_SIZE + 1);
    Ok((0..crops)
        .map(|i| {
            let mut rng = keyed_rng(seed, i as u64);
            (rng.random_range(0..rows), rng.random_range(0..cols))
        })
        .collect())
}

/// The four shift magnitudes of a single crop.
pub fn crop_shift_magnitudes(img: &RasterImage, origin: (usize, usize), mode: ShiftMode) -> Result<Vec<Plane>> {
    match mode {
        ShiftMode::Circular => {
            let r = crop_residual(img, origin)?;
            SHIFTS.iter().map(|&(sr, sc)| fft2d_magnitude(&r, sr, sc)).collect()
        }
        ShiftMode::OffsetCrop => {
            let (rows, cols) = (img.height() - CROP_SIZE + 1, img.width() - CROP_SIZE + 1);
            SHIFTS
                .iter()
                .map(|&(sr, sc)| {
                    let o = ((origin.0 + sr) % rows, (origin.1 + sc) % cols);
                    fft2d_magnitude(&crop_residual(img, o)?, 0, 0)
                })
                .collect()
        }
    }
}

/// Averages the per-shift magnitudes of `crops` seeded windows.
///
/// Crops are transformed in parallel batches but accumulated in crop-index
/// order, so the result does not depend on the thread count.
pub fn fingerprint(img: &RasterImage, crops: usize, seed: u64, mode: ShiftMode) -> Result<FingerprintSet> {
    if crops == 0 {
        return Err(Error::arg("fingerprint needs at least one crop"));
    }
    let origins = crop_origins(img, crops, seed)?;
    let mut sums = vec![vec![0.0f64; CROP_SIZE * CROP_SIZE]; SHIFTS.len()];
    for batch in origins.chunks(BATCH) {
        let mags: Vec<Vec<Plane>> = batch
            .par_iter()
            .map(|&o| crop_shift_magnitudes(img, o, mode))
            .collect::<Result<_>>()?;
        for per_crop in &mags {
            for (sum, plane) in sums.iter_mut().zip(per_crop) {
                for (s, v) in sum.iter_mut().zip(plane.data()) {
                    *s += v;
                }
            }
        }
    }
    let planes = sums
        .into_iter()
        .map(|s| Plane::new(CROP_SIZE, CROP_SIZE, s.into_iter().map(|v| v / crops as f64).collect()))
        .collect::<Result<_>>()?;
    Ok(FingerprintSet {
        planes,
        shift_ids: SHIFTS,
        crop_count: crops,
        seed,
        mode,
    })
}

/// `255·log1p(v)/log1p(max)` rounded to 8 bits; an all-zero plane stays zero.
pub fn plane_to_image(p: &Plane) -> RasterImage {
    let max = p.data().iter().fold(0.0f64, |m, &v| m.max(v));
    let denom = max.ln_1p();
    let data = p
        .data()
        .iter()
        .map(|&v| {
            if denom > 0.0 {
                (255.0 * v.max(0.0).ln_1p() / denom).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect();
    RasterImage::new(p.width(), p.height(), 1, data).expect("dims match plane")
}

/// Writes `<stem>_shift<k>.<ext>` for k = 0..4 into `dir`.
pub fn export_fingerprint(fp: &FingerprintSet, dir: &Path, stem: &str, format: ExportFormat) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    fp.planes
        .iter()
        .enumerate()
        .map(|(k, plane)| {
            let img = plane_to_image(plane);
            let bytes = match format {
                ExportFormat::Png => encode_png(&img)?,
                ExportFormat::Jpeg => jpeg_encode(&img, EXPORT_JPEG_QUALITY)?,
            };
            let path = dir.join(format!("{stem}_shift{k}.{}", format.extension()));
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
