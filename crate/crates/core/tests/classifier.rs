use std::collections::BTreeMap;

use camtrace_core::classifier::train_binary;
use camtrace_core::classifier::{LinearSvm, Route, Standardizer, SvmParams, TwoLayerEnsemble};
use camtrace_core::features::{FeatureLayout, FeatureVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CLASSES: usize = 10;

fn labelled(values: Vec<f64>, label: String) -> FeatureVector {
    FeatureVector {
        label: Some(label),
        ..FeatureVector::new(values)
    }
}

/// Ten binaries over a 10-D identity standardization where binary `k`
/// returns `x[k]`, so any decision vector can be produced directly.
fn identity_ensemble() -> TwoLayerEnsemble {
    let binaries = (0..CLASSES)
        .map(|k| LinearSvm {
            weights: (0..CLASSES).map(|j| if j == k { 1.0 } else { 0.0 }).collect(),
            bias: 0.0,
        })
        .collect();
    // Predictions go through `predict_standardized`, so the layout is unused.
    TwoLayerEnsemble::from_parts(
        (0..CLASSES).map(|k| format!("cam{k}")).collect(),
        FeatureLayout::ALL,
        SvmParams::default(),
        Standardizer {
            mean: vec![0.0; CLASSES],
            scale: vec![1.0; CLASSES],
        },
        binaries,
        BTreeMap::new(),
    )
    .unwrap()
}

/// Training rows for the identity ensemble: class `k` sits along axis `k`.
fn axis_rows() -> Vec<FeatureVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut rows = Vec::new();
    for k in 0..CLASSES {
        for _ in 0..8 {
            let mut v: Vec<f64> = (0..CLASSES).map(|_| rng.random_range(-0.3..0.3)).collect();
            v[k] += 3.0;
            rows.push(labelled(v, format!("cam{k}")));
        }
    }
    rows
}

#[test]
fn single_positive_binary_decides() {
    let ens = identity_ensemble();
    let mut x = vec![-1.0; CLASSES];
    x[0] = 2.0;
    let p = ens.predict_standardized(&x).unwrap();
    assert_eq!((p.class, p.route), (0, Route::Single));
    assert_eq!(p.margin, 2.0);
    assert_eq!(ens.conflict_count(), 0);
}

#[test]
fn two_positive_binaries_use_the_conflict_model() {
    let mut ens = identity_ensemble();
    ens.attach_train_store(&axis_rows()).unwrap();
    let mut x = vec![-1.0; CLASSES];
    x[2] = 0.4;
    x[5] = 1.5;
    let p = ens.predict_standardized(&x).unwrap();
    assert_eq!(p.route, Route::Conflict);
    assert_eq!(p.positives, vec![2, 5]);
    let models = ens.conflict_models();
    let conflict = &models[&vec![2, 5]];
    assert_eq!(p.class, conflict.predict(&x).0);
    assert_eq!(p.class, 5);
    // A second query reuses the cached model.
    ens.predict_standardized(&x).unwrap();
    assert_eq!(ens.conflict_count(), 1);
}

#[test]
fn no_positive_binary_falls_back_to_the_maximum() {
    let ens = identity_ensemble();
    let x: Vec<f64> = (0..CLASSES)
        .map(|k| if k == 7 { -0.1 } else { -1.0 - k as f64 * 0.01 })
        .collect();
    let p = ens.predict_standardized(&x).unwrap();
    assert_eq!((p.class, p.route), (7, Route::NoPositive));
}

#[test]
fn trained_toy_ensemble_fallback_picks_unique_maximizer() {
    let rows = axis_rows();
    let layout = FeatureLayout {
        spn: false,
        cfa: false,
        glcm: true,
    };
    // Pad rows to the 20-wide GLCM layout.
    let rows: Vec<FeatureVector> = rows
        .into_iter()
        .map(|mut v| {
            v.values.resize(20, 0.0);
            v
        })
        .collect();
    let ens = TwoLayerEnsemble::train(
        &rows,
        layout,
        SvmParams {
            seed: 1,
            ..Default::default()
        },
    )
    .unwrap();
    let x = vec![0.0; 20];
    let d = ens.decision_values(&ens.standardize(&x).unwrap());
    if d.iter().all(|&v| v <= 0.0) {
        let best = (0..d.len()).max_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
        assert_eq!(ens.predict(&x).unwrap().class, best);
    }
    for v in &rows {
        assert_eq!(ens.predict(&v.values).unwrap().label, *v.label.as_ref().unwrap());
    }
}

#[test]
fn duplicated_training_set_keeps_decisions() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let xs: Vec<Vec<f64>> = (0..60)
        .map(|i| {
            let shift = if i % 2 == 0 { 1.0 } else { -1.0 };
            vec![
                shift + rng.random_range(-1.2..1.2),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ]
        })
        .collect();
    let ys: Vec<bool> = (0..60).map(|i| i % 2 == 0).collect();
    let params = SvmParams::default();
    let a = train_binary(&xs, &ys, &params).unwrap();
    let xs2: Vec<Vec<f64>> = xs.iter().chain(&xs).cloned().collect();
    let ys2: Vec<bool> = ys.iter().chain(&ys).copied().collect();
    let b = train_binary(&xs2, &ys2, &params).unwrap();
    for x in &xs {
        assert!((a.decision(x) - b.decision(x)).abs() < 1e-6);
    }
}

#[test]
fn training_is_deterministic() {
    let rows = axis_rows();
    let layout = FeatureLayout {
        spn: false,
        cfa: true,
        glcm: false,
    };
    let rows: Vec<FeatureVector> = rows
        .into_iter()
        .map(|mut v| {
            v.values.truncate(2);
            v.label = Some(if v.values[0] > 1.5 { "a".into() } else { "b".into() });
            v
        })
        .collect();
    let a = TwoLayerEnsemble::train(
        &rows,
        layout,
        SvmParams {
            seed: 5,
            ..Default::default()
        },
    )
    .unwrap();
    let b = TwoLayerEnsemble::train(
        &rows,
        layout,
        SvmParams {
            seed: 5,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(a.to_model_string(), b.to_model_string());
}

#[test]
fn saved_model_predicts_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let layout = FeatureLayout {
        spn: false,
        cfa: true,
        glcm: false,
    };
    let centers = [(2.0, 0.0), (-2.0, 0.0), (0.0, 2.0), (0.0, -2.0)];
    let rows: Vec<FeatureVector> = (0..80)
        .map(|i| {
            let (cx, cy) = centers[i % 4];
            labelled(
                vec![cx + rng.random_range(-1.5..1.5), cy + rng.random_range(-1.5..1.5)],
                format!("c{}", i % 4),
            )
        })
        .collect();
    let mut ens = TwoLayerEnsemble::train(
        &rows,
        layout,
        SvmParams {
            seed: 8,
            ..Default::default()
        },
    )
    .unwrap();
    ens.finalize().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.txt");
    ens.save(&path).unwrap();
    let back = TwoLayerEnsemble::load(&path).unwrap();
    for _ in 0..100 {
        let x = vec![rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
        assert_eq!(ens.predict(&x).unwrap(), back.predict(&x).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn standardized_training_has_zero_mean(rows in proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, 4), 2..30)) {
        let s = Standardizer::fit(&rows).unwrap();
        for j in 0..4 {
            let m: f64 = rows.iter().map(|r| s.transform(r).unwrap()[j]).sum::<f64>() / rows.len() as f64;
            prop_assert!(m.abs() < 1e-9);
        }
        prop_assert!(s.scale.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn symmetric_data_gives_zero_bias(points in proptest::collection::vec((0.1f64..3.0, -2.0f64..2.0), 2..20), seed in 0u64..1000) {
        let mut xs: Vec<Vec<f64>> = points.iter().map(|&(a, b)| vec![a, b]).collect();
        xs.extend(points.iter().map(|&(a, b)| vec![-a, -b]));
        let ys: Vec<bool> = (0..xs.len()).map(|i| i < points.len()).collect();
        let m = train_binary(&xs, &ys, &SvmParams { seed, epochs: 300, ..Default::default() }).unwrap();
        prop_assert!(m.bias.abs() < 1e-6);
    }
}
