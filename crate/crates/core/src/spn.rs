//! Sensor pattern noise: bilateral-denoise residual, retention of the
//! strongest residual values and a fixed 25-value summary.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::imaging::{bilateral_filter, Plane, RasterImage};

pub const BILATERAL_SIGMA_SPATIAL: f64 = 2.0;
pub const BILATERAL_SIGMA_RANGE: f64 = 25.0;
pub const BILATERAL_RADIUS: usize = 3;
pub const TOP_FRACTION: f64 = 0.04;

pub const SPN_FEATURE_LEN: usize = 25;
const HIST_BINS: usize = 16;
const HIST_LIMIT: f64 = 64.0;
const QUANTILES: [f64; 5] = [0.10, 0.25, 0.50, 0.75, 0.90];

const SIDECAR_MAGIC: &[u8; 4] = b"SPN1";

/// Gray image minus its bilateral-denoised version.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseResidual {
    pub plane: Plane,
}

/// The retained strongest residual entries, in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseNoise {
    pub coords: Vec<(u32, u32)>,
    pub values: Vec<f64>,
    /// (height, width) of the source plane.
    pub source_dims: (u32, u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpnFeatures {
    pub mean: f64,
    pub std_dev: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// p10, p25, p50, p75, p90 of retained |values|.
    pub quantiles: [f64; 5],
    /// 16 bins over [-64, 64], out-of-range values clipped into the end bins.
    pub histogram: [f64; HIST_BINS],
}

impl SpnFeatures {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(SPN_FEATURE_LEN);
        v.extend_from_slice(&[self.mean, self.std_dev, self.skewness, self.excess_kurtosis]);
        v.extend_from_slice(&self.quantiles);
        v.extend_from_slice(&self.histogram);
        v
    }
}

pub fn extract_residual(img: &RasterImage) -> NoiseResidual {
    let gray = img.to_grayscale();
    let denoised = bilateral_filter(&gray, BILATERAL_SIGMA_SPATIAL, BILATERAL_SIGMA_RANGE, BILATERAL_RADIUS)
        .expect("bilateral parameters are valid constants");
    NoiseResidual {
        plane: gray.sub(&denoised).expect("same dims"),
    }
}

/// Number of entries `top_fraction` keeps from `n` samples.
pub fn retained_count(fraction: f64, n: usize) -> usize {
    // The epsilon guards products like 0.04·100 = 4.000000000000001 and
    // 0.07·100 = 7.000000000000001 against spurious floor changes the other way.
    (fraction * n as f64 + 1e-9).floor() as usize
}

/// Keeps the `floor(fraction · H · W)` entries of largest magnitude; equal
/// magnitudes are broken in favour of the earlier row-major position.
pub fn top_fraction(res: &NoiseResidual, fraction: f64) -> Result<SparseNoise> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::arg(format!("fraction must be in (0,1], got {fraction}")));
    }
    let p = &res.plane;
    let k = retained_count(fraction, p.len());
    if k == 0 {
        return Err(Error::arg(format!(
            "{}x{} residual is too small to retain a {fraction} fraction",
            p.width(),
            p.height()
        )));
    }
    let mut order: Vec<usize> = (0..p.len()).collect();
    let data = p.data();
    let by_strength = |&a: &usize, &b: &usize| data[b].abs().total_cmp(&data[a].abs()).then(a.cmp(&b));
    if k < order.len() {
        order.select_nth_unstable_by(k - 1, by_strength);
        order.truncate(k);
    }
    order.sort_unstable();
    let w = p.width();
    Ok(SparseNoise {
        coords: order.iter().map(|&i| ((i / w) as u32, (i % w) as u32)).collect(),
        values: order.iter().map(|&i| data[i]).collect(),
        source_dims: (p.height() as u32, p.width() as u32),
    })
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Moments, magnitude quantiles and a clipped histogram of retained values.
///
/// Standard deviation uses the `n - 1` denominator; skewness and excess
/// kurtosis are the moment ratios `m3 / m2^1.5` and `m4 / m2² - 3` of the
/// central moments. A zero-variance sample yields skewness = kurtosis = 0.
pub fn spn_features(sn: &SparseNoise) -> Result<SpnFeatures> {
    let v = &sn.values;
    if v.len() < 2 {
        return Err(Error::arg(format!("need at least 2 retained values, got {}", v.len())));
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in v {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let std_dev = (m2 / (n - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };

    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(f64::total_cmp);
    let mut quantiles = [0.0; 5];
    for (q, &p) in quantiles.iter_mut().zip(&QUANTILES) {
        *q = quantile(&mags, p);
    }

    let mut histogram = [0.0; HIST_BINS];
    let width = 2.0 * HIST_LIMIT / HIST_BINS as f64;
    for &x in v {
        let bin = ((x + HIST_LIMIT) / width).floor().clamp(0.0, (HIST_BINS - 1) as f64) as usize;
        histogram[bin] += 1.0;
    }
    for h in &mut histogram {
        *h /= n;
    }
    Ok(SpnFeatures {
        mean,
        std_dev,
        skewness,
        excess_kurtosis,
        quantiles,
        histogram,
    })
}

/// Full SPN feature block of an image.
pub fn spn_feature_block(img: &RasterImage) -> Result<Vec<f64>> {
    let sparse = top_fraction(&extract_residual(img), TOP_FRACTION)?;
    Ok(spn_features(&sparse)?.to_vec())
}

impl SparseNoise {
    /// Binary sidecar: `SPN1`, u32 height, u32 width, u32 count, then
    /// `(u32 row, u32 col, f64 value)` triples, all little-endian.
    pub fn write_sidecar(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(SIDECAR_MAGIC)?;
        w.write_all(&self.source_dims.0.to_le_bytes())?;
        w.write_all(&self.source_dims.1.to_le_bytes())?;
        w.write_all(&(self.values.len() as u32).to_le_bytes())?;
        for (&(r, c), &v) in self.coords.iter().zip(&self.values) {
            w.write_all(&r.to_le_bytes())?;
            w.write_all(&c.to_le_bytes())?;
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_sidecar(mut r: impl Read) -> Result<SparseNoise> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|e| Error::format("magic", e.to_string()))?;
        if &magic != SIDECAR_MAGIC {
            return Err(Error::format("magic", format!("expected SPN1, got {magic:?}")));
        }
        let mut u32_field = |name: &str| -> Result<u32> {
            let mut b = [0u8; 4];
            r.read_exact(&mut b).map_err(|e| Error::format(name, e.to_string()))?;
            Ok(u32::from_le_bytes(b))
        };
        let height = u32_field("height")?;
        let width = u32_field("width")?;
        let count = u32_field("count")?;
        if u64::from(count) > u64::from(height) * u64::from(width) {
            return Err(Error::format(
                "count",
                format!("{count} entries exceed {height}x{width} plane"),
            ));
        }
        let mut coords = Vec::with_capacity(count as usize);
        let mut values = Vec::with_capacity(count as usize);
        let mut buf = [0u8; 16];
        for i in 0..count {
            r.read_exact(&mut buf)
                .map_err(|e| Error::format(format!("entry {i}"), e.to_string()))?;
            let row = u32::from_le_bytes(buf[0..4].try_into().unwrap());
            let col = u32::from_le_bytes(buf[4..8].try_into().unwrap());
            if row >= height || col >= width {
                return Err(Error::format(
                    format!("entry {i}"),
                    format!("({row},{col}) out of bounds"),
                ));
            }
            coords.push((row, col));
            values.push(f64::from_le_bytes(buf[8..16].try_into().unwrap()));
        }
        Ok(SparseNoise {
            coords,
            values,
            source_dims: (height, width),
        })
    }
}
