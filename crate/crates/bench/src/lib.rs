//! Deterministic inputs shared by the benchmarks.

use camtrace_core::evaluation::{simulate_capture, SyntheticCamera};
use camtrace_core::features::{FeatureLayout, FeatureVector};
use camtrace_core::RasterImage;

/// A synthetic square camera capture.
pub fn capture(size: usize) -> RasterImage {
    simulate_capture(&SyntheticCamera::new(0, 0), 1, size, size).expect("size is at least 64")
}

/// `classes` Gaussian-like clusters of `per_class` rows in the CFA+GLCM layout.
pub fn clustered_rows(classes: usize, per_class: usize) -> (FeatureLayout, Vec<FeatureVector>) {
    let layout = FeatureLayout {
        spn: false,
        cfa: true,
        glcm: true,
    };
    let dim = layout.len();
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let rows = (0..classes * per_class)
        .map(|i| {
            let c = i % classes;
            let values = (0..dim)
                .map(|j| if j % classes == c { 1.5 } else { 0.0 } + next())
                .collect();
            FeatureVector {
                label: Some(format!("cam{c:02}")),
                ..FeatureVector::new(values)
            }
        })
        .collect();
    (layout, rows)
}
