use super::filter::mirror_index;
use super::{to_u8, RasterImage};
use crate::error::{Error, Result};

const CUBIC_A: f64 = -0.5;

fn cubic_weight(x: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 {
        ((CUBIC_A + 2.0) * x - (CUBIC_A + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((CUBIC_A * x - 5.0 * CUBIC_A) * x + 8.0 * CUBIC_A) * x - 4.0 * CUBIC_A
    } else {
        0.0
    }
}

/// Per output coordinate: four source indices and their weights.
fn taps(len_in: usize, len_out: usize) -> Vec<([usize; 4], [f64; 4])> {
    let scale = len_in as f64 / len_out as f64;
    (0..len_out)
        .map(|o| {
            let src = (o as f64 + 0.5) * scale - 0.5;
            let base = src.floor();
            let t = src - base;
            let base = base as isize;
            let mut idx = [0usize; 4];
            let mut wts = [0.0; 4];
            for k in 0..4 {
                idx[k] = mirror_index(base - 1 + k as isize, len_in);
                wts[k] = cubic_weight(t - (k as f64 - 1.0));
            }
            (idx, wts)
        })
        .collect()
}

/// Catmull-Rom bicubic resampling by `factor` with half-pixel center
/// alignment; output dims are `round(w·factor)` × `round(h·factor)`.
pub fn bicubic_resize(img: &RasterImage, factor: f64) -> Result<RasterImage> {
    if !factor.is_finite() || factor <= 0.0 {
        return Err(Error::arg(format!("resize factor must be > 0, got {factor}")));
    }
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let out_w = (w as f64 * factor).round() as usize;
    let out_h = (h as f64 * factor).round() as usize;
    if out_w == 0 || out_h == 0 {
        return Err(Error::arg(format!(
            "resize of {w}x{h} by {factor} yields an empty image"
        )));
    }
    let xt = taps(w, out_w);
    let yt = taps(h, out_h);

    // Horizontal pass into f64, then vertical.
    let mut horiz = vec![0.0; out_w * h * ch];
    for y in 0..h {
        for (ox, (idx, wts)) in xt.iter().enumerate() {
            for c in 0..ch {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += wts[k] * f64::from(img.get(y, idx[k], c));
                }
                horiz[(y * out_w + ox) * ch + c] = acc;
            }
        }
    }
    let mut data = vec![0u8; out_w * out_h * ch];
    for (oy, (idx, wts)) in yt.iter().enumerate() {
        for ox in 0..out_w {
            for c in 0..ch {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += wts[k] * horiz[(idx[k] * out_w + ox) * ch + c];
                }
                data[(oy * out_w + ox) * ch + c] = to_u8(acc);
            }
        }
    }
    RasterImage::new(out_w, out_h, ch, data)
}
