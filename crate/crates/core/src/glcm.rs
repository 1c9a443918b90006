//! Hybrid-edge sharpening followed by gray-level co-occurrence statistics.

use crate::error::{Error, Result};
use crate::imaging::{canny_edges, laplacian, Plane, RasterImage, CANNY_HIGH, CANNY_LOW};

pub const DEFAULT_LEVELS: usize = 64;
/// Directed pixel offsets (drow, dcol), in feature-block order.
pub const OFFSETS: [(isize, isize); 4] = [(0, 1), (1, 0), (1, 1), (1, -1)];
pub const FEATURES_PER_OFFSET: usize = 5;
pub const GLCM_FEATURE_LEN: usize = FEATURES_PER_OFFSET * OFFSETS.len();

/// Marginal deviations below this are treated as zero.
const DEGENERATE_SIGMA: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct GlcmMatrix {
    pub levels: usize,
    pub offset: (isize, isize),
    /// Row-major `levels × levels` counts of directed pairs.
    pub counts: Vec<u64>,
    pub normalized: Vec<f64>,
}

impl GlcmMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.normalized[i * self.levels + j]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlcmStats {
    pub entropy: f64,
    pub contrast: f64,
    pub homogeneity: f64,
    pub correlation: f64,
    pub energy: f64,
}

impl GlcmStats {
    pub fn to_array(self) -> [f64; FEATURES_PER_OFFSET] {
        [
            self.entropy,
            self.contrast,
            self.homogeneity,
            self.correlation,
            self.energy,
        ]
    }
}

/// Per-pixel maximum of the Canny edge map and the Laplacian magnitude.
pub fn hybrid_edge_image(img: &RasterImage) -> Plane {
    let gray = img.to_grayscale();
    let edges = canny_edges(&gray, CANNY_LOW, CANNY_HIGH).expect("default thresholds are ordered");
    edges.zip_with(&laplacian(&gray), f64::max).expect("same dims")
}

/// Otsu threshold over a 256-bin histogram of `floor(v)`; the class split is
/// `bin < t` vs `bin >= t`. A histogram with fewer than two occupied bins
/// returns 0 so every value is kept.
pub fn otsu_threshold(p: &Plane) -> usize {
    let mut hist = [0u64; 256];
    for &v in p.data() {
        hist[v.floor().clamp(0.0, 255.0) as usize] += 1;
    }
    if hist.iter().filter(|&&c| c > 0).count() < 2 {
        return 0;
    }
    let total = p.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let (mut best_t, mut best_var) = (0, -1.0);
    for t in 1..256 {
        w0 += hist[t - 1] as f64;
        sum0 += (t - 1) as f64 * hist[t - 1] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if between > best_var {
            best_var = between;
            best_t = t;
        }
    }
    best_t
}

/// Gray minus hybrid edges, clamped to [0, 255], with values under the Otsu
/// threshold zeroed and the rest kept as-is.
pub fn sharpened_gray(img: &RasterImage) -> Plane {
    let gray = img.to_grayscale();
    let s = gray
        .zip_with(&hybrid_edge_image(img), |g, e| (g - e).clamp(0.0, 255.0))
        .expect("same dims");
    let t = otsu_threshold(&s) as f64;
    s.map(|v| if v < t { 0.0 } else { v })
}

#[inline]
fn quantize(v: f64, levels: usize) -> usize {
    ((v * levels as f64 / 256.0).floor().max(0.0) as usize).min(levels - 1)
}

/// Directed co-occurrence counts of quantized levels at `offset`.
pub fn glcm_matrix(p: &Plane, offset: (isize, isize), levels: usize) -> Result<GlcmMatrix> {
    if levels < 2 {
        return Err(Error::arg(format!("GLCM needs at least 2 levels, got {levels}")));
    }
    if offset == (0, 0) {
        return Err(Error::arg("GLCM offset must be nonzero"));
    }
    let (w, h) = (p.width() as isize, p.height() as isize);
    let (dr, dc) = offset;
    let (y0, y1) = (0.max(-dr), h.min(h - dr));
    let (x0, x1) = (0.max(-dc), w.min(w - dc));
    if y0 >= y1 || x0 >= x1 {
        return Err(Error::arg(format!(
            "offset {offset:?} leaves no pixel pairs in a {w}x{h} plane"
        )));
    }
    let q: Vec<usize> = p.data().iter().map(|&v| quantize(v, levels)).collect();
    let mut counts = vec![0u64; levels * levels];
    for y in y0..y1 {
        for x in x0..x1 {
            let a = q[(y * w + x) as usize];
            let b = q[((y + dr) * w + x + dc) as usize];
            counts[a * levels + b] += 1;
        }
    }
    let total = counts.iter().sum::<u64>() as f64;
    let normalized = counts.iter().map(|&c| c as f64 / total).collect();
    Ok(GlcmMatrix {
        levels,
        offset,
        counts,
        normalized,
    })
}

/// Entropy (natural log), contrast, homogeneity, correlation and energy of a
/// normalized co-occurrence matrix. Correlation is 1 when either marginal
/// has zero spread, and clamped to [-1, 1] otherwise.
pub fn glcm_features(m: &GlcmMatrix) -> GlcmStats {
    let l = m.levels;
    let (mut entropy, mut contrast, mut homogeneity, mut energy) = (0.0, 0.0, 0.0, 0.0);
    let (mut mu_i, mut mu_j) = (0.0, 0.0);
    for i in 0..l {
        for j in 0..l {
            let p = m.prob(i, j);
            if p == 0.0 {
                continue;
            }
            let d = i as f64 - j as f64;
            entropy -= p * p.ln();
            contrast += d * d * p;
            homogeneity += p / (1.0 + d * d);
            energy += p * p;
            mu_i += i as f64 * p;
            mu_j += j as f64 * p;
        }
    }
    let (mut var_i, mut var_j, mut cov) = (0.0, 0.0, 0.0);
    for i in 0..l {
        for j in 0..l {
            let p = m.prob(i, j);
            if p == 0.0 {
                continue;
            }
            let (di, dj) = (i as f64 - mu_i, j as f64 - mu_j);
            var_i += di * di * p;
            var_j += dj * dj * p;
            cov += di * dj * p;
        }
    }
    let (sd_i, sd_j) = (var_i.sqrt(), var_j.sqrt());
    let correlation = if sd_i < DEGENERATE_SIGMA || sd_j < DEGENERATE_SIGMA {
        1.0
    } else {
        (cov / (sd_i * sd_j)).clamp(-1.0, 1.0)
    };
    GlcmStats {
        entropy: entropy.max(0.0),
        contrast,
        homogeneity,
        correlation,
        energy,
    }
}

/// 20 values: the five statistics for each of the four offsets, offset-major.
pub fn glcm_feature_block(img: &RasterImage) -> Result<Vec<f64>> {
    if img.width() < 2 || img.height() < 2 {
        return Err(Error::arg(format!(
            "GLCM features need at least a 2x2 image, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    let s = sharpened_gray(img);
    let mut out = Vec::with_capacity(GLCM_FEATURE_LEN);
    for offset in OFFSETS {
        out.extend_from_slice(&glcm_features(&glcm_matrix(&s, offset, DEFAULT_LEVELS)?).to_array());
    }
    Ok(out)
}
