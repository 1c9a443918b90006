use std::path::PathBuf;

use rayon::prelude::*;

use super::manifest::{DatasetManifest, ManifestEntry, Split};
use super::metric::{weighted_accuracy_labeled, WeightedAccuracyReport};
use crate::classifier::{SvmParams, TwoLayerEnsemble};
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureLayout, FeatureVector};
use crate::imaging::read_image;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub layout: FeatureLayout,
    pub svm: SvmParams,
    /// Where to write the JSON report, if anywhere.
    pub report_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            layout: FeatureLayout::ALL,
            svm: SvmParams::default(),
            report_path: None,
        }
    }
}

/// Reads one manifest image and extracts its features.
pub fn entry_features(
    manifest: &DatasetManifest,
    entry: &ManifestEntry,
    layout: FeatureLayout,
) -> Result<FeatureVector> {
    let img = read_image(&manifest.resolve(entry))?;
    Ok(FeatureVector {
        values: extract_features(&img, layout)?,
        label: Some(entry.label.clone()),
        altered: entry.altered,
        standardized: false,
    })
}

/// Features of every entry in manifest order, extracted in parallel. All
/// failing paths are reported together.
pub fn manifest_features(manifest: &DatasetManifest, layout: FeatureLayout) -> Result<Vec<FeatureVector>> {
    if layout.is_empty() {
        return Err(Error::arg("no feature block enabled"));
    }
    let results: Vec<Result<FeatureVector>> = manifest
        .entries()
        .par_iter()
        .map(|e| entry_features(manifest, e, layout))
        .collect();
    let mut out = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (e, r) in manifest.entries().iter().zip(results) {
        match r {
            Ok(v) => out.push(v),
            Err(err) => failures.push((manifest.resolve(e), err.to_string())),
        }
    }
    if !failures.is_empty() {
        return Err(Error::Inputs { failures });
    }
    Ok(out)
}

/// Trains on the train split, predicts the test split and scores it.
pub fn run_experiment(manifest: &DatasetManifest, config: &ExperimentConfig) -> Result<WeightedAccuracyReport> {
    if config.layout.is_empty() {
        return Err(Error::arg("no feature block enabled"));
    }
    let train_m = manifest.split(Split::Train);
    let test_m = manifest.split(Split::Test);
    if train_m.is_empty() || test_m.is_empty() {
        return Err(Error::arg("experiment needs both train and test entries"));
    }
    let features = manifest_features(manifest, config.layout)?;
    let (train, test): (Vec<_>, Vec<_>) = manifest
        .entries()
        .iter()
        .zip(features)
        .partition(|(e, _)| e.split == Split::Train);
    let train: Vec<FeatureVector> = train.into_iter().map(|(_, v)| v).collect();
    let ensemble = TwoLayerEnsemble::train(&train, config.layout, config.svm)?;
    let report = evaluate_vectors(&ensemble, &test.into_iter().map(|(_, v)| v).collect::<Vec<_>>())?;
    if let Some(path) = &config.report_path {
        std::fs::write(path, report.to_json()?).map_err(|e| Error::io(path, e))?;
    }
    Ok(report)
}

/// Scores labelled vectors against an ensemble, in input order.
pub fn evaluate_vectors(ensemble: &TwoLayerEnsemble, test: &[FeatureVector]) -> Result<WeightedAccuracyReport> {
    let classes = ensemble.classes();
    let mut preds = Vec::with_capacity(test.len());
    let mut truth = Vec::with_capacity(test.len());
    let mut altered = Vec::with_capacity(test.len());
    for (i, v) in test.iter().enumerate() {
        let label = v
            .label
            .as_ref()
            .ok_or_else(|| Error::arg(format!("test vector {i} has no label")))?;
        let t = classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::arg(format!("test label `{label}` was not seen in training")))?;
        preds.push(ensemble.predict(&v.values)?.class);
        truth.push(t);
        altered.push(v.altered);
    }
    weighted_accuracy_labeled(&preds, &truth, &altered, classes)
}
