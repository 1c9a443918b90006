//! Colour-filter-array interpolation detector.
//!
//! Demosaicing leaves the interpolated green samples on every other
//! anti-diagonal (for a Bayer layout), so after second-derivative high-pass
//! filtering the variance along anti-diagonals alternates with period 2. The
//! detector measures that alternation as a spectral peak at normalized
//! frequency 0.5 relative to the median of the remaining spectrum.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::imaging::{convolve2d, Kernel, Plane, RasterImage};

/// Peak-to-median ratio above which an image is declared interpolated.
pub const PEAK_THRESHOLD: f64 = 4.0;
/// Ratio reported when the median is zero but the peak is not.
pub const PEAK_RATIO_CAP: f64 = 1e6;
pub const MIN_SIGNAL_LEN: usize = 16;
pub const CFA_FEATURE_LEN: usize = 2;

/// Per anti-diagonal (`y + x = d`) population variance.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalVarianceSignal {
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CfaScore {
    pub peak_ratio: f64,
    pub is_interpolated: bool,
}

impl CfaScore {
    /// `[ln(1 + peak_ratio), is_interpolated as 0/1]`.
    pub fn to_features(self) -> [f64; CFA_FEATURE_LEN] {
        [self.peak_ratio.ln_1p(), if self.is_interpolated { 1.0 } else { 0.0 }]
    }
}

/// Separable `[1, -2, 1] ⊗ [1, -2, 1]` high-pass of the green channel.
pub fn highpass_green(img: &RasterImage) -> Result<Plane> {
    if img.channels() != 3 {
        return Err(Error::arg(format!(
            "CFA detection needs an RGB image, got {} channel(s)",
            img.channels()
        )));
    }
    let second = [1.0, -2.0, 1.0];
    convolve2d(&img.channel_plane(1)?, &Kernel::separable(&second, &second)?)
}

pub fn diagonal_variances(p: &Plane) -> DiagonalVarianceSignal {
    let (w, h) = (p.width(), p.height());
    let len = w + h - 1;
    let mut sum = vec![0.0; len];
    let mut count = vec![0usize; len];
    for y in 0..h {
        for (x, &v) in p.row(y).iter().enumerate() {
            sum[y + x] += v;
            count[y + x] += 1;
        }
    }
    let mean: Vec<f64> = sum.iter().zip(&count).map(|(s, &n)| s / n as f64).collect();
    let mut sq = vec![0.0; len];
    for y in 0..h {
        for (x, &v) in p.row(y).iter().enumerate() {
            let d = v - mean[y + x];
            sq[y + x] += d * d;
        }
    }
    DiagonalVarianceSignal {
        values: sq.iter().zip(&count).map(|(s, &n)| s / n as f64).collect(),
    }
}

/// DFT magnitude of the mean-removed signal at bin `k`.
fn dft_magnitude(centered: &[f64], k: usize) -> f64 {
    let n = centered.len();
    let (mut re, mut im) = (0.0, 0.0);
    for (j, &v) in centered.iter().enumerate() {
        let ang = -2.0 * PI * ((k * j) % n) as f64 / n as f64;
        re += v * ang.cos();
        im += v * ang.sin();
    }
    re.hypot(im)
}

/// Ratio of the spectral magnitude at the bin nearest normalized frequency
/// 0.5 to the median magnitude over the other bins strictly inside (0, 0.5).
pub fn dft_peak_score(sig: &DiagonalVarianceSignal) -> Result<CfaScore> {
    let n = sig.values.len();
    if n < MIN_SIGNAL_LEN {
        return Err(Error::arg(format!(
            "diagonal signal of length {n} is shorter than {MIN_SIGNAL_LEN}"
        )));
    }
    let mean = sig.values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = sig.values.iter().map(|v| v - mean).collect();
    let scale = sig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let spread = centered.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // A constant signal leaves only rounding noise after mean removal.
    if spread <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Ok(CfaScore {
            peak_ratio: 0.0,
            is_interpolated: false,
        });
    }
    // For odd n, bins (n-1)/2 and (n+1)/2 are equidistant from 0.5 and
    // conjugate, so the lower one stands for both.
    let peak_bin = n / 2;
    let peak = dft_magnitude(&centered, peak_bin);
    let mut others: Vec<f64> = (1..n.div_ceil(2))
        .filter(|&k| k != peak_bin)
        .map(|k| dft_magnitude(&centered, k))
        .collect();
    others.sort_unstable_by(f64::total_cmp);
    let median = if others.is_empty() {
        0.0
    } else if others.len() % 2 == 1 {
        others[others.len() / 2]
    } else {
        0.5 * (others[others.len() / 2 - 1] + others[others.len() / 2])
    };
    let noise_floor = 1e-9 * spread * n as f64;
    let peak_ratio = if peak <= noise_floor {
        0.0
    } else if median <= noise_floor {
        PEAK_RATIO_CAP
    } else {
        (peak / median).min(PEAK_RATIO_CAP)
    };
    Ok(CfaScore {
        peak_ratio,
        is_interpolated: peak_ratio > PEAK_THRESHOLD,
    })
}

pub fn detect_interpolation(img: &RasterImage) -> Result<CfaScore> {
    let hp = highpass_green(img)?;
    dft_peak_score(&diagonal_variances(&hp))
}
