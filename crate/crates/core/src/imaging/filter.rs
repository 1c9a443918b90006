use super::{Kernel, Plane};
use crate::error::{Error, Result};

/// Maps a possibly out-of-range index onto `0..n` by reflecting about the
/// edge samples without repeating them (`-1 -> 1`, `n -> n - 2`).
#[inline]
pub fn mirror_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m >= n as isize {
        (period - m) as usize
    } else {
        m as usize
    }
}

/// Correlates `p` with `k` under mirror padding.
///
/// `out[y, x] = Σ k[dy, dx] · p[y + dy - r, x + dx - r]`, accumulated in
/// row-major kernel order.
pub fn convolve2d(p: &Plane, k: &Kernel) -> Result<Plane> {
    if k.weights().iter().any(|w| !w.is_finite()) {
        return Err(Error::arg("kernel weights must be finite"));
    }
    let (w, h) = (p.width(), p.height());
    let r = k.radius() as isize;
    let side = k.side();
    // Precomputed padded coordinates per output row/col.
    let cols: Vec<Vec<usize>> = (0..w as isize)
        .map(|x| (-r..=r).map(|d| mirror_index(x + d, w)).collect())
        .collect();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        let rows: Vec<usize> = (-r..=r).map(|d| mirror_index(y + d, h)).collect();
        for col_idx in &cols {
            let mut acc = 0.0;
            for (dy, &sy) in rows.iter().enumerate() {
                let src = p.row(sy);
                let kr = &k.weights()[dy * side..(dy + 1) * side];
                for (kw, &sx) in kr.iter().zip(col_idx) {
                    acc += kw * src[sx];
                }
            }
            out.push(acc);
        }
    }
    Plane::new(w, h, out)
}

/// Sampled Gaussian of the given radius, normalized to unit sum.
pub fn gaussian_kernel_1d(sigma: f64, radius: usize) -> Result<Vec<f64>> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::arg(format!("gaussian sigma must be > 0, got {sigma}")));
    }
    let raw: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|v| v / total).collect())
}

// Both passes accumulate deviations from the center sample so that a constant
// input is reproduced bit-exactly (the taps sum to 1 only up to rounding).
fn correlate_rows(p: &Plane, taps: &[f64]) -> Plane {
    let (w, h) = (p.width(), p.height());
    let r = (taps.len() / 2) as isize;
    let idx: Vec<Vec<usize>> = (0..w as isize)
        .map(|x| (-r..=r).map(|d| mirror_index(x + d, w)).collect())
        .collect();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let src = p.row(y);
        for (x, cols) in idx.iter().enumerate() {
            let c = src[x];
            out.push(c + taps.iter().zip(cols).map(|(t, &sx)| t * (src[sx] - c)).sum::<f64>());
        }
    }
    Plane::from_vec_unchecked(w, h, out)
}

fn correlate_cols(p: &Plane, taps: &[f64]) -> Plane {
    let (w, h) = (p.width(), p.height());
    let r = (taps.len() / 2) as isize;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        let rows: Vec<usize> = (-r..=r).map(|d| mirror_index(y + d, h)).collect();
        for x in 0..w {
            let c = p.get(y as usize, x);
            out.push(
                c + taps
                    .iter()
                    .zip(&rows)
                    .map(|(t, &sy)| t * (p.get(sy, x) - c))
                    .sum::<f64>(),
            );
        }
    }
    Plane::from_vec_unchecked(w, h, out)
}

/// Separable Gaussian blur (horizontal pass, then vertical).
pub fn gaussian_blur(p: &Plane, sigma: f64, radius: usize) -> Result<Plane> {
    let taps = gaussian_kernel_1d(sigma, radius)?;
    Ok(correlate_cols(&correlate_rows(p, &taps), &taps))
}

/// Edge-preserving smoothing: neighbors weighted by spatial distance and
/// intensity difference, normalized per pixel.
pub fn bilateral_filter(p: &Plane, sigma_spatial: f64, sigma_range: f64, radius: usize) -> Result<Plane> {
    if sigma_spatial.is_nan() || sigma_spatial <= 0.0 || sigma_range.is_nan() || sigma_range <= 0.0 {
        return Err(Error::arg(format!(
            "bilateral sigmas must be > 0, got spatial={sigma_spatial} range={sigma_range}"
        )));
    }
    if radius < 1 {
        return Err(Error::arg("bilateral radius must be >= 1"));
    }
    let (w, h) = (p.width(), p.height());
    let r = radius as isize;
    let side = 2 * radius + 1;
    let spatial: Vec<f64> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dy * dy + dx * dx) as f64))
        .map(|d2| (-d2 / (2.0 * sigma_spatial * sigma_spatial)).exp())
        .collect();
    let range_scale = -1.0 / (2.0 * sigma_range * sigma_range);
    let cols: Vec<Vec<usize>> = (0..w as isize)
        .map(|x| (-r..=r).map(|d| mirror_index(x + d, w)).collect())
        .collect();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        let rows: Vec<usize> = (-r..=r).map(|d| mirror_index(y + d, h)).collect();
        for (x, col_idx) in cols.iter().enumerate() {
            let center = p.get(y as usize, x);
            let (mut num, mut den) = (0.0, 0.0);
            for (dy, &sy) in rows.iter().enumerate() {
                let src = p.row(sy);
                let sw = &spatial[dy * side..(dy + 1) * side];
                for (s, &sx) in sw.iter().zip(col_idx) {
                    let v = src[sx];
                    let diff = v - center;
                    let wgt = s * (diff * diff * range_scale).exp();
                    num += wgt * diff;
                    den += wgt;
                }
            }
            // The center sample always carries weight 1, so den >= 1.
            out.push(center + num / den);
        }
    }
    Plane::new(w, h, out)
}

/// 4-neighbour Laplacian magnitude, clamped to the 8-bit range.
pub fn laplacian(p: &Plane) -> Plane {
    let k = Kernel::new(1, vec![0.0, 1.0, 0.0, 1.0, -4.0, 1.0, 0.0, 1.0, 0.0]).expect("static kernel");
    convolve2d(p, &k)
        .expect("static kernel is finite")
        .map(|v| v.abs().clamp(0.0, 255.0))
}

impl Plane {
    /// Internal constructor for filter outputs whose finiteness follows from
    /// finite inputs and finite weights.
    pub(crate) fn from_vec_unchecked(width: usize, height: usize, data: Vec<f64>) -> Plane {
        debug_assert_eq!(data.len(), width * height);
        Plane::new(width, height, data).expect("filter output must be finite")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise_plane(w: usize, h: usize, seed: u64) -> Plane {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Plane::from_fn(w, h, |_, _| rng.random_range(0.0..255.0))
    }

    #[test]
    fn mirror_reflects_without_repeat() {
        assert_eq!(mirror_index(-1, 5), 1);
        assert_eq!(mirror_index(-2, 5), 2);
        assert_eq!(mirror_index(5, 5), 3);
        assert_eq!(mirror_index(6, 5), 2);
        assert_eq!(mirror_index(-7, 3), 1);
        assert_eq!(mirror_index(4, 1), 0);
    }

    #[test]
    fn identity_kernel_is_identity() {
        let p = noise_plane(7, 5, 1);
        assert_eq!(convolve2d(&p, &Kernel::identity()).unwrap(), p);
    }

    #[test]
    fn constant_plane_scales_by_kernel_sum() {
        let p = Plane::filled(6, 4, 3.0);
        let k = Kernel::new(1, vec![1.0, 2.0, 1.0, 0.0, 0.5, 0.0, -1.0, 0.0, 1.0]).unwrap();
        let out = convolve2d(&p, &k).unwrap();
        assert!(out.data().iter().all(|&v| (v - 3.0 * 4.5).abs() < 1e-12));
    }

    #[test]
    fn box_kernel_on_centered_impulse() {
        // Hand-evaluated under mirror padding: edge rows/cols reflect onto the
        // center row/col, so corners see the impulse 4 times and edges twice.
        let mut p = Plane::zeros(3, 3);
        p.set(1, 1, 1.0);
        let out = convolve2d(&p, &Kernel::new(1, vec![1.0; 9]).unwrap()).unwrap();
        assert_eq!(out.data(), &[4.0, 2.0, 4.0, 2.0, 1.0, 2.0, 4.0, 2.0, 4.0]);
    }

    #[test]
    fn kernel_larger_than_plane() {
        let p = Plane::new(2, 1, vec![1.0, 3.0]).unwrap();
        let out = convolve2d(&p, &Kernel::new(2, vec![1.0; 25]).unwrap()).unwrap();
        // Column taps reflect to [0,1,0,1,0] at x=0 and [1,0,1,0,1] at x=1; all 5 rows hit row 0.
        assert_eq!(out.data(), &[45.0, 55.0]);
    }

    #[test]
    fn gaussian_impulse_sums_to_one() {
        let mut p = Plane::zeros(31, 31);
        p.set(15, 15, 1.0);
        let out = gaussian_blur(&p, 2.0, 6).unwrap();
        assert!((out.sum() - 1.0).abs() < 1e-9);
        assert!(gaussian_blur(&p, 0.0, 2).is_err());
    }

    #[test]
    fn gaussian_semigroup() {
        let p = noise_plane(64, 48, 9);
        let twice = gaussian_blur(&gaussian_blur(&p, 3.0, 12).unwrap(), 4.0, 16).unwrap();
        let once = gaussian_blur(&p, 5.0, 20).unwrap();
        assert!(twice.max_abs_diff(&once) < 0.5, "diff {}", twice.max_abs_diff(&once));
    }

    #[test]
    fn smoothing_preserves_constants_exactly() {
        let p = Plane::filled(9, 7, 117.0);
        assert_eq!(bilateral_filter(&p, 2.0, 25.0, 3).unwrap(), p);
        assert_eq!(gaussian_blur(&p, 1.5, 4).unwrap().max_abs_diff(&p), 0.0);
    }

    #[test]
    fn bilateral_preserves_step_edge() {
        let p = Plane::from_fn(12, 6, |_, x| if x < 6 { 0.0 } else { 255.0 });
        let out = bilateral_filter(&p, 2.0, 1.0, 3).unwrap();
        assert!(out.max_abs_diff(&p) <= 1.0);
    }

    #[test]
    fn bilateral_reduces_noise_variance() {
        let p = noise_plane(40, 40, 3);
        let var = |q: &Plane| {
            let m = q.mean();
            q.data().iter().map(|v| (v - m).powi(2)).sum::<f64>() / q.len() as f64
        };
        let out = bilateral_filter(&p, 2.0, 1e4, 3).unwrap();
        assert!(var(&out) < var(&p));
        assert!(bilateral_filter(&p, -1.0, 1.0, 3).is_err());
        assert!(bilateral_filter(&p, 1.0, 0.0, 3).is_err());
    }

    #[test]
    fn laplacian_cases() {
        assert!(laplacian(&Plane::filled(5, 5, 9.0)).data().iter().all(|&v| v == 0.0));
        let mut imp = Plane::zeros(5, 5);
        imp.set(2, 2, 255.0);
        let out = laplacian(&imp);
        assert_eq!(out.get(2, 2), 255.0);
        for (y, x) in [(1, 2), (3, 2), (2, 1), (2, 3)] {
            assert_eq!(out.get(y, x), 255.0);
        }
        assert_eq!(out.get(0, 0), 0.0);
        let ramp = Plane::from_fn(8, 8, |_, x| x as f64);
        let out = laplacian(&ramp);
        for y in 1..7 {
            for x in 1..7 {
                assert_eq!(out.get(y, x), 0.0);
            }
        }
    }
}
