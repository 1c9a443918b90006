use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use super::Plane;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn norm(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

/// In-place iterative radix-2 decimation-in-time FFT (forward, unscaled).
/// `buf.len()` must be a power of two.
pub fn fft_in_place(buf: &mut [Complex]) -> Result<()> {
    let n = buf.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::arg(format!("FFT length must be a power of two, got {n}")));
    }
    let bits = n.trailing_zeros();
    if bits > 0 {
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        // Twiddles computed directly per index, not by recurrence, to keep
        // rounding independent of transform length.
        let twiddles: Vec<Complex> = (0..half)
            .map(|k| {
                let ang = -2.0 * PI * k as f64 / len as f64;
                Complex::new(ang.cos(), ang.sin())
            })
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = buf[start + k];
                let b = buf[start + k + half] * twiddles[k];
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
    Ok(())
}

/// Circularly shifts the square power-of-two plane `p` by
/// (`shift_rows`, `shift_cols`), takes its 2-D DFT and returns `|F[u, v]|`.
pub fn fft2d_magnitude(p: &Plane, shift_rows: usize, shift_cols: usize) -> Result<Plane> {
    let n = p.width();
    if p.height() != n || !n.is_power_of_two() {
        return Err(Error::arg(format!(
            "FFT plane must be square with power-of-two side, got {}x{}",
            p.width(),
            p.height()
        )));
    }
    if shift_rows >= n || shift_cols >= n {
        return Err(Error::arg(format!(
            "shift ({shift_rows},{shift_cols}) out of range for side {n}"
        )));
    }
    let mut grid = vec![Complex::ZERO; n * n];
    for y in 0..n {
        let dst_y = (y + shift_rows) % n;
        for x in 0..n {
            grid[dst_y * n + (x + shift_cols) % n] = Complex::new(p.get(y, x), 0.0);
        }
    }
    for row in grid.chunks_exact_mut(n) {
        fft_in_place(row)?;
    }
    let mut column = vec![Complex::ZERO; n];
    for x in 0..n {
        for y in 0..n {
            column[y] = grid[y * n + x];
        }
        fft_in_place(&mut column)?;
        for y in 0..n {
            grid[y * n + x] = column[y];
        }
    }
    Plane::new(n, n, grid.into_iter().map(Complex::norm).collect())
}
