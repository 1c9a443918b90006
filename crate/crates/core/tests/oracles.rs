//! Library results checked against naive reimplementations.

use camtrace_core::cfa::{dft_peak_score, DiagonalVarianceSignal, PEAK_THRESHOLD};
use camtrace_core::evaluation::simulator::{simulate_capture, SyntheticCamera};
use camtrace_core::fingerprint::{fingerprint, ShiftMode};
use camtrace_core::glcm::{glcm_feature_block, glcm_features, glcm_matrix, sharpened_gray, OFFSETS};
use camtrace_core::imaging::{decode_image, fft_in_place, jpeg_encode, Complex, Plane, RasterImage};
use camtrace_core::manipulation::{apply_manipulation, ManipulationTag};
use camtrace_core::spn::{top_fraction, NoiseResidual};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

mod common;
use common::{naive_glcm, naive_glcm_counts};

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn glcm_three_by_three_diagonal() {
    let p = Plane::new(3, 3, vec![0.0, 128.0, 0.0, 128.0, 0.0, 128.0, 0.0, 128.0, 0.0]).unwrap();
    let m = glcm_matrix(&p, (1, 1), 2).unwrap();
    assert_eq!(
        vec![m.counts[..2].to_vec(), m.counts[2..].to_vec()],
        naive_glcm_counts(&p, (1, 1), 2)
    );
    // Four diagonal pairs, all 0 -> 0 since the checkerboard is constant along (1, 1).
    assert_eq!(m.total(), 4);
    assert_eq!(m.counts, vec![2, 0, 0, 2]);
    let f = glcm_features(&m).to_array();
    assert!(close(&f, &naive_glcm(&p, (1, 1), 2), 1e-12));
    assert!((f[0] - 2f64.ln()).abs() < 1e-12);
    assert_eq!(f[1], 0.0);
    assert_eq!(f[3], 1.0);
}

#[test]
fn glcm_three_by_three_distinct_levels() {
    let p = Plane::from_fn(3, 3, |y, x| ((y * 3 + x) as f64 * 256.0 / 9.0 + 1.0).floor());
    let m = glcm_matrix(&p, (1, 1), 9).unwrap();
    let naive = naive_glcm_counts(&p, (1, 1), 9);
    assert_eq!(m.counts, naive.concat());
    assert_eq!(m.total(), 4);
    // Pairs: 0->4, 1->5, 3->7, 4->8.
    for (a, b) in [(0, 4), (1, 5), (3, 7), (4, 8)] {
        assert_eq!(m.counts[a * 9 + b], 1);
    }
    assert!(close(&glcm_features(&m).to_array(), &naive_glcm(&p, (1, 1), 9), 1e-12));
}

#[test]
fn glcm_block_matches_naive_on_random_images() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let img = RasterImage::from_fn(32, 32, 3, |_, _, _| rng.random()).unwrap();
        let s = sharpened_gray(&img);
        let expect: Vec<f64> = OFFSETS.iter().flat_map(|&o| naive_glcm(&s, o, 64)).collect();
        let got = glcm_feature_block(&img).unwrap();
        assert!(close(&got, &expect, 1e-9), "seed {seed}: {got:?} vs {expect:?}");
    }
}

#[test]
fn cfa_white_noise_false_alarm_rate() {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let hits = (0..1000u64)
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values = (0..512).map(|_| normal.sample(&mut rng)).collect();
            dft_peak_score(&DiagonalVarianceSignal { values }).unwrap().peak_ratio >= PEAK_THRESHOLD
        })
        .count();
    assert!(hits < 10, "{hits} of 1000 noise signals crossed the threshold");
}

#[test]
fn spn_selection_matches_sort() {
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, h) = (rng.random_range(5..40), rng.random_range(5..40));
        // Coarse values force plenty of magnitude ties.
        let plane = Plane::from_fn(w, h, |_, _| rng.random_range(-6i32..=6) as f64);
        let sn = top_fraction(&NoiseResidual { plane: plane.clone() }, 0.04).unwrap();
        let k = 4 * w * h / 100;
        let mut idx: Vec<usize> = (0..w * h).collect();
        idx.sort_by(|&a, &b| plane.data()[b].abs().total_cmp(&plane.data()[a].abs()).then(a.cmp(&b)));
        let mut keep: Vec<usize> = idx[..k].to_vec();
        keep.sort();
        let coords: Vec<(u32, u32)> = keep.iter().map(|&i| ((i / w) as u32, (i % w) as u32)).collect();
        assert_eq!(sn.coords, coords);
        assert_eq!(sn.values, keep.iter().map(|&i| plane.data()[i]).collect::<Vec<_>>());
    }
}

fn psnr(a: &RasterImage, b: &RasterImage) -> f64 {
    let mse = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
        .sum::<f64>()
        / a.data().len() as f64;
    10.0 * (255.0 * 255.0 / mse).log10()
}

#[test]
fn jpeg_quality_70_keeps_natural_images_close() {
    let cam = SyntheticCamera::new(0, 4);
    let img = simulate_capture(&cam, 11, 128, 96).unwrap();
    let out = decode_image(&jpeg_encode(&img, 70).unwrap()).unwrap();
    assert_eq!((out.width(), out.height(), out.channels()), (128, 96, 3));
    assert!(psnr(&img, &out) > 25.0);
}

#[test]
fn jpeg90_changes_samples_but_not_shape() {
    let cam = SyntheticCamera::new(1, 4);
    let img = simulate_capture(&cam, 3, 80, 64).unwrap();
    let out = apply_manipulation(&img, ManipulationTag::Jpeg90).unwrap();
    assert_eq!((out.width(), out.height()), (80, 64));
    assert_ne!(out.data(), img.data());
    assert!(psnr(&img, &out) > 30.0);
}

#[test]
fn fft_matches_direct_dft() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 64;
    let x: Vec<Complex> = (0..n)
        .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut buf = x.clone();
    fft_in_place(&mut buf).unwrap();
    for (k, got) in buf.iter().enumerate() {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, v) in x.iter().enumerate() {
            let a = -2.0 * std::f64::consts::PI * (k * j) as f64 / n as f64;
            re += v.re * a.cos() - v.im * a.sin();
            im += v.re * a.sin() + v.im * a.cos();
        }
        assert!((got.re - re).abs() < 1e-9 && (got.im - im).abs() < 1e-9);
    }
}

fn cosine(a: &Plane, b: &Plane) -> f64 {
    let dot: f64 = a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum();
    let na: f64 = a.data().iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.data().iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Indices of the `k` largest entries, skipping DC.
fn peaks(p: &Plane, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (1..p.len()).collect();
    idx.sort_by(|&a, &b| p.data()[b].total_cmp(&p.data()[a]));
    let mut top = idx[..k].to_vec();
    top.sort();
    top
}

#[test]
fn fingerprint_shifts_share_peaks() {
    // A period-8 texture puts strong peaks on a fixed frequency lattice.
    let img = RasterImage::from_fn(320, 300, 1, |y, x, _| {
        let t = 2.0 * std::f64::consts::PI / 8.0;
        (128.0 + 60.0 * (t * x as f64).sin() + 40.0 * (t * y as f64).cos()) as u8
    })
    .unwrap();
    for mode in [ShiftMode::Circular, ShiftMode::OffsetCrop] {
        let fp = fingerprint(&img, 6, 2, mode).unwrap();
        assert_eq!(fp.planes.len(), 4);
        let reference = peaks(&fp.planes[0], 4);
        for p in &fp.planes[1..] {
            assert_eq!(peaks(p, 4), reference, "{mode}");
            assert!(cosine(&fp.planes[0], p) > 0.99, "{mode}");
        }
    }
}
