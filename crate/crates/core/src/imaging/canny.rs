use std::collections::VecDeque;

use super::filter::{convolve2d, gaussian_blur};
use super::{Kernel, Plane};
use crate::error::{Error, Result};

pub const CANNY_LOW: f64 = 50.0;
pub const CANNY_HIGH: f64 = 150.0;
pub const CANNY_SIGMA: f64 = 1.4;

/// Binary Canny edge map with values in `{0, 255}`.
///
/// Gaussian smoothing (σ = 1.4), Sobel gradients, non-maximum suppression
/// along the quantized gradient direction, then double-threshold hysteresis
/// with 8-connectivity. `low`/`high` apply to the Sobel gradient magnitude.
pub fn canny_edges(p: &Plane, low: f64, high: f64) -> Result<Plane> {
    if !(0.0 <= low && low <= high) {
        return Err(Error::arg(format!(
            "canny thresholds need 0 <= low <= high, got {low}, {high}"
        )));
    }
    let (w, h) = (p.width(), p.height());
    let smooth = gaussian_blur(p, CANNY_SIGMA, (3.0 * CANNY_SIGMA).ceil() as usize)?;
    let sobel_x = Kernel::new(1, vec![-1.0, 0.0, 1.0, -2.0, 0.0, 2.0, -1.0, 0.0, 1.0])?;
    let sobel_y = Kernel::new(1, vec![-1.0, -2.0, -1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 1.0])?;
    let gx = convolve2d(&smooth, &sobel_x)?;
    let gy = convolve2d(&smooth, &sobel_y)?;
    let mag: Vec<f64> = gx.data().iter().zip(gy.data()).map(|(a, b)| a.hypot(*b)).collect();

    let at = |y: isize, x: isize| -> f64 {
        if y < 0 || x < 0 || y >= h as isize || x >= w as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };

    // Non-maximum suppression. Ties along the gradient keep the pixel on the
    // negative side only, so a symmetric ridge thins to one pixel.
    let mut thin = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            let (dx, dy) = direction_step(gx.data()[i], gy.data()[i]);
            let (yi, xi) = (y as isize, x as isize);
            let prev = at(yi - dy, xi - dx);
            let next = at(yi + dy, xi + dx);
            if m > prev && m >= next {
                thin[i] = m;
            }
        }
    }

    // Hysteresis: grow strong seeds through weak pixels.
    let mut out = vec![0.0; w * h];
    let mut queue = VecDeque::new();
    for (i, &m) in thin.iter().enumerate() {
        if m >= high && m > 0.0 {
            out[i] = 255.0;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (y, x) = ((i / w) as isize, (i % w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (ny, nx) = (y + dy, x + dx);
                if ny < 0 || nx < 0 || ny >= h as isize || nx >= w as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if out[j] == 0.0 && thin[j] >= low && thin[j] > 0.0 {
                    out[j] = 255.0;
                    queue.push_back(j);
                }
            }
        }
    }
    Plane::new(w, h, out)
}

/// Unit step (dx, dy) along the gradient direction quantized to 0/45/90/135°.
fn direction_step(gx: f64, gy: f64) -> (isize, isize) {
    let mut angle = gy.atan2(gx).to_degrees();
    if angle < 0.0 {
        angle += 180.0;
    }
    if !(22.5..157.5).contains(&angle) {
        (1, 0)
    } else if angle < 67.5 {
        (1, 1)
    } else if angle < 112.5 {
        (0, 1)
    } else {
        (-1, 1)
    }
}
