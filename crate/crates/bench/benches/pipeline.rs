use std::hint::black_box;

use camtrace_bench::{capture, clustered_rows};
use camtrace_core::cfa::detect_interpolation;
use camtrace_core::fingerprint::{fingerprint, ShiftMode};
use camtrace_core::glcm::glcm_feature_block;
use camtrace_core::imaging::{bilateral_filter, fft2d_magnitude, jpeg_encode};
use camtrace_core::spn::spn_feature_block;
use camtrace_core::{SvmParams, TwoLayerEnsemble};
use criterion::{criterion_group, criterion_main, Criterion};

fn imaging(c: &mut Criterion) {
    let img = capture(256);
    let gray = img.to_grayscale();
    c.bench_function("fft2d_magnitude 256", |b| {
        b.iter(|| fft2d_magnitude(black_box(&gray), 128, 0).unwrap())
    });
    c.bench_function("bilateral_filter 256", |b| {
        b.iter(|| bilateral_filter(black_box(&gray), 2.0, 25.0, 3).unwrap())
    });
    c.bench_function("jpeg_encode q90 256", |b| {
        b.iter(|| jpeg_encode(black_box(&img), 90).unwrap())
    });
}

fn features(c: &mut Criterion) {
    let img = capture(256);
    c.bench_function("spn_feature_block 256", |b| {
        b.iter(|| spn_feature_block(black_box(&img)).unwrap())
    });
    c.bench_function("detect_interpolation 256", |b| {
        b.iter(|| detect_interpolation(black_box(&img)).unwrap())
    });
    c.bench_function("glcm_feature_block 256", |b| {
        b.iter(|| glcm_feature_block(black_box(&img)).unwrap())
    });
    let large = capture(320);
    let mut group = c.benchmark_group("fingerprint");
    group.sample_size(10);
    group.bench_function("16 crops", |b| {
        b.iter(|| fingerprint(black_box(&large), 16, 0, ShiftMode::Circular).unwrap())
    });
    group.finish();
}

fn classifier(c: &mut Criterion) {
    let (layout, rows) = clustered_rows(5, 40);
    let params = SvmParams {
        epochs: 500,
        ..SvmParams::default()
    };
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    group.bench_function("train 5x40", |b| {
        b.iter(|| TwoLayerEnsemble::train(black_box(&rows), layout, params).unwrap())
    });
    let model = TwoLayerEnsemble::train(&rows, layout, params).unwrap();
    group.bench_function("predict", |b| {
        b.iter(|| model.predict(black_box(&rows[7].values)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, imaging, features, classifier);
criterion_main!(benches);
