//! Raster data model and the filter/transform primitives every feature
//! extractor builds on.
//!
//! All spatial filters use mirror (reflect-without-repeat) padding and
//! accumulate in `f64` in row-major order, so results are bit-reproducible.

mod canny;
mod codec;
mod fft;
mod filter;
mod jpeg;
mod resize;

pub use canny::{canny_edges, CANNY_HIGH, CANNY_LOW, CANNY_SIGMA};
pub use codec::{decode_image, encode_png, read_image, write_png};
pub use fft::{fft2d_magnitude, fft_in_place, Complex};
pub use filter::{bilateral_filter, convolve2d, gaussian_blur, gaussian_kernel_1d, laplacian, mirror_index};
pub use jpeg::jpeg_encode;
pub use resize::bicubic_resize;

use crate::error::{Error, Result};

/// 8-bit raster, row-major, channel-interleaved. One channel (gray) or three
/// (red, green, blue).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::arg(format!("raster dims must be >= 1, got {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::arg(format!("raster must have 1 or 3 channels, got {channels}")));
        }
        if data.len() != width * height * channels {
            return Err(Error::arg(format!(
                "raster data length {} != {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image filled with one value per channel.
    pub fn filled(width: usize, height: usize, pixel: &[u8]) -> Result<Self> {
        let data = pixel
            .iter()
            .copied()
            .cycle()
            .take(width * height * pixel.len())
            .collect();
        Self::new(width, height, pixel.len(), data)
    }

    /// Builds a raster by evaluating `f(row, col, channel)` at every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(y, x, c));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, channel: usize) -> u8 {
        self.data[(row * self.width + col) * self.channels + channel]
    }

    /// One channel as a floating-point plane.
    pub fn channel_plane(&self, channel: usize) -> Result<Plane> {
        if channel >= self.channels {
            return Err(Error::arg(format!(
                "channel {channel} out of range for {}-channel image",
                self.channels
            )));
        }
        let data = self
            .data
            .iter()
            .skip(channel)
            .step_by(self.channels)
            .map(|&v| f64::from(v))
            .collect();
        Plane::new(self.width, self.height, data)
    }

    /// Luminance plane, `L = 0.299 R + 0.587 G + 0.114 B`; gray input passes
    /// through as floats.
    pub fn to_grayscale(&self) -> Plane {
        let data = match self.channels {
            1 => self.data.iter().map(|&v| f64::from(v)).collect(),
            _ => self
                .data
                .chunks_exact(3)
                .map(|px| 0.299 * f64::from(px[0]) + 0.587 * f64::from(px[1]) + 0.114 * f64::from(px[2]))
                .collect(),
        };
        Plane {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Sub-image with top-left corner at (`row`, `col`).
    pub fn crop(&self, row: usize, col: usize, width: usize, height: usize) -> Result<RasterImage> {
        if width == 0 || height == 0 || row + height > self.height || col + width > self.width {
            return Err(Error::arg(format!(
                "crop {width}x{height} at ({row},{col}) exceeds {}x{} image",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(width * height * self.channels);
        for y in row..row + height {
            let start = (y * self.width + col) * self.channels;
            data.extend_from_slice(&self.data[start..start + width * self.channels]);
        }
        RasterImage::new(width, height, self.channels, data)
    }
}

/// Single-channel `f64` plane, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::arg(format!("plane dims must be >= 1, got {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::arg(format!(
                "plane data length {} != {width}x{height}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(format!("plane value at index {i} is not finite")));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "plane dims must be >= 1");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "plane dims must be >= 1");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(y, x));
            }
        }
        Self { width, height, data }
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

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Element-wise combination of two equally sized planes.
    pub fn zip_with(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Result<Plane> {
        self.check_same_dims(other)?;
        Ok(Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn sub(&self, other: &Plane) -> Result<Plane> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn crop(&self, row: usize, col: usize, width: usize, height: usize) -> Result<Plane> {
        if width == 0 || height == 0 || row + height > self.height || col + width > self.width {
            return Err(Error::arg(format!(
                "crop {width}x{height} at ({row},{col}) exceeds {}x{} plane",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(width * height);
        for y in row..row + height {
            data.extend_from_slice(&self.row(y)[col..col + width]);
        }
        Ok(Plane { width, height, data })
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    pub fn max_abs_diff(&self, other: &Plane) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn check_same_dims(&self, other: &Plane) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::arg(format!(
                "plane dims differ: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }
}

/// Square correlation kernel of side `2·radius + 1`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    radius: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn new(radius: usize, weights: Vec<f64>) -> Result<Self> {
        let side = 2 * radius + 1;
        if weights.len() != side * side {
            return Err(Error::arg(format!(
                "kernel of radius {radius} needs {} weights, got {}",
                side * side,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::arg("kernel weights must be finite"));
        }
        Ok(Self { radius, weights })
    }

    /// Outer product `column ⊗ row` of two odd-length 1-D kernels of equal length.
    pub fn separable(column: &[f64], row: &[f64]) -> Result<Self> {
        if column.len() != row.len() || column.len().is_multiple_of(2) {
            return Err(Error::arg("separable kernel factors must share one odd length"));
        }
        let weights = column.iter().flat_map(|&c| row.iter().map(move |&r| c * r)).collect();
        Self::new(column.len() / 2, weights)
    }

    pub fn identity() -> Self {
        Self {
            radius: 0,
            weights: vec![1.0],
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn at(&self, dy: usize, dx: usize) -> f64 {
        self.weights[dy * self.side() + dx]
    }
}

pub fn to_grayscale(img: &RasterImage) -> Plane {
    img.to_grayscale()
}

/// Rounds half away from zero and clamps to the 8-bit range.
#[inline]
pub fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grayscale_weights() {
        let white = RasterImage::filled(1, 1, &[255, 255, 255]).unwrap();
        assert_eq!(white.to_grayscale().data(), &[255.0]);
        let red = RasterImage::filled(1, 1, &[255, 0, 0]).unwrap();
        assert!((red.to_grayscale().data()[0] - 76.245).abs() < 1e-12);
        let gray = RasterImage::new(2, 1, 1, vec![7, 200]).unwrap();
        assert_eq!(gray.to_grayscale().data(), &[7.0, 200.0]);
    }

    #[test]
    fn rejects_bad_rasters() {
        assert!(RasterImage::new(0, 1, 1, vec![]).is_err());
        assert!(RasterImage::new(2, 2, 3, vec![0; 11]).is_err());
        assert!(RasterImage::new(1, 1, 2, vec![0; 2]).is_err());
        assert!(Plane::new(1, 1, vec![f64::NAN]).is_err());
        assert!(Kernel::new(1, vec![0.0; 8]).is_err());
        assert!(Kernel::new(0, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn crop_extracts_window() {
        let img = RasterImage::from_fn(4, 3, 1, |y, x, _| (y * 4 + x) as u8).unwrap();
        let c = img.crop(1, 2, 2, 2).unwrap();
        assert_eq!(c.data(), &[6, 7, 10, 11]);
        assert!(img.crop(2, 2, 2, 2).is_err());
    }
}
