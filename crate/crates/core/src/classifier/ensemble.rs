//! Two-layer scheme: per-class binaries first, a one-vs-rest model over the
//! contested classes when several binaries fire.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use super::standardize::Standardizer;
use super::svm::{argmax, class_params, train_binary, LinearSvm, OneVsRest, SvmParams};
use crate::error::{Error, Result};
use crate::features::{FeatureLayout, FeatureVector};

/// Which layer produced a prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Exactly one binary fired.
    Single,
    /// Several fired; the conflict model over them decided.
    Conflict,
    /// Several fired, no conflict model exists for them and no training data
    /// is left to build one: argmax of the contested binaries.
    ConflictFallback,
    /// No binary fired: argmax of all binaries.
    NoPositive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub class: usize,
    pub label: String,
    /// Decision value of the deciding model for the chosen class.
    pub margin: f64,
    /// Classes whose binary decision was positive.
    pub positives: Vec<usize>,
    pub route: Route,
}

/// Standardized training rows kept for lazy conflict training.
#[derive(Debug)]
pub(crate) struct TrainStore {
    pub xs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

#[derive(Debug)]
pub struct TwoLayerEnsemble {
    pub(crate) classes: Vec<String>,
    pub(crate) layout: FeatureLayout,
    pub(crate) params: SvmParams,
    pub(crate) standardizer: Standardizer,
    pub(crate) binaries: Vec<LinearSvm>,
    pub(crate) conflicts: RwLock<BTreeMap<Vec<usize>, OneVsRest>>,
    pub(crate) store: Option<Arc<TrainStore>>,
}

impl Clone for TwoLayerEnsemble {
    fn clone(&self) -> Self {
        Self {
            classes: self.classes.clone(),
            layout: self.layout,
            params: self.params,
            standardizer: self.standardizer.clone(),
            binaries: self.binaries.clone(),
            conflicts: RwLock::new(self.conflict_models()),
            store: self.store.clone(),
        }
    }
}

impl TwoLayerEnsemble {
    /// Fits the standardizer and one binary per class on labelled vectors.
    /// Classes are the sorted distinct labels. Binaries train in parallel.
    pub fn train(train: &[FeatureVector], layout: FeatureLayout, params: SvmParams) -> Result<Self> {
        params.validate()?;
        let dim = layout.len();
        let mut names = BTreeSet::new();
        for (i, v) in train.iter().enumerate() {
            if v.values.len() != dim {
                return Err(Error::arg(format!(
                    "vector {i} has {} features, layout `{layout}` needs {dim}",
                    v.values.len()
                )));
            }
            names.insert(
                v.label
                    .clone()
                    .ok_or_else(|| Error::arg(format!("training vector {i} has no label")))?,
            );
        }
        let classes: Vec<String> = names.into_iter().collect();
        if classes.len() < 2 {
            return Err(Error::arg(format!("need at least 2 classes, got {}", classes.len())));
        }
        let raw: Vec<Vec<f64>> = train.iter().map(|v| v.values.clone()).collect();
        let standardizer = Standardizer::fit(&raw)?;
        let xs = raw
            .iter()
            .map(|r| standardizer.transform(r))
            .collect::<Result<Vec<_>>>()?;
        let labels: Vec<usize> = train
            .iter()
            .map(|v| {
                classes
                    .binary_search(v.label.as_ref().expect("checked"))
                    .expect("collected")
            })
            .collect();
        let binaries = (0..classes.len())
            .into_par_iter()
            .map(|c| {
                let ys: Vec<bool> = labels.iter().map(|&l| l == c).collect();
                train_binary(&xs, &ys, &class_params(&params, c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            classes,
            layout,
            params,
            standardizer,
            binaries,
            conflicts: RwLock::new(BTreeMap::new()),
            store: Some(Arc::new(TrainStore { xs, labels })),
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn layout(&self) -> FeatureLayout {
        self.layout
    }

    pub fn params(&self) -> SvmParams {
        self.params
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn binaries(&self) -> &[LinearSvm] {
        &self.binaries
    }

    /// Snapshot of the cached conflict models.
    pub fn conflict_models(&self) -> BTreeMap<Vec<usize>, OneVsRest> {
        self.conflicts.read().expect("conflict cache poisoned").clone()
    }

    pub fn conflict_count(&self) -> usize {
        self.conflicts.read().expect("conflict cache poisoned").len()
    }

    /// Whether the training rows are still held for lazy conflict training.
    pub fn has_train_store(&self) -> bool {
        self.store.is_some()
    }

    pub fn standardize(&self, raw: &[f64]) -> Result<Vec<f64>> {
        self.standardizer.transform(raw)
    }

    pub fn decision_values(&self, x: &[f64]) -> Vec<f64> {
        self.binaries.iter().map(|m| m.decision(x)).collect()
    }

    /// Predicts a raw (unstandardized) feature vector.
    pub fn predict(&self, raw: &[f64]) -> Result<Prediction> {
        self.predict_standardized(&self.standardize(raw)?)
    }

    pub fn predict_standardized(&self, x: &[f64]) -> Result<Prediction> {
        if self.binaries.is_empty() {
            return Err(Error::State("ensemble has no trained binaries".into()));
        }
        if x.len() != self.standardizer.dim() {
            return Err(Error::arg(format!(
                "expected {} features, got {}",
                self.standardizer.dim(),
                x.len()
            )));
        }
        let d = self.decision_values(x);
        let positives: Vec<usize> = (0..d.len()).filter(|&c| d[c] > 0.0).collect();
        let (class, margin, route) = match positives.len() {
            0 => {
                let c = argmax(&d);
                (c, d[c], Route::NoPositive)
            }
            1 => (positives[0], d[positives[0]], Route::Single),
            _ if self.ensure_conflict(&positives)? => {
                let cache = self.conflicts.read().expect("conflict cache poisoned");
                let (class, margin) = cache[&positives].predict(x);
                (class, margin, Route::Conflict)
            }
            _ => {
                let sub: Vec<f64> = positives.iter().map(|&c| d[c]).collect();
                let k = argmax(&sub);
                (positives[k], sub[k], Route::ConflictFallback)
            }
        };
        Ok(Prediction {
            class,
            label: self.classes[class].clone(),
            margin,
            positives,
            route,
        })
    }

    /// Ensures a conflict model for `subset` exists, training it from the
    /// store if needed. `Ok(false)` when it is absent and cannot be trained.
    fn ensure_conflict(&self, subset: &[usize]) -> Result<bool> {
        if self
            .conflicts
            .read()
            .expect("conflict cache poisoned")
            .contains_key(subset)
        {
            return Ok(true);
        }
        let Some(store) = &self.store else {
            return Ok(false);
        };
        // Training happens under the write lock so concurrent callers never
        // train the same subset twice.
        let mut cache = self.conflicts.write().expect("conflict cache poisoned");
        if !cache.contains_key(subset) {
            let model = OneVsRest::train(&store.xs, &store.labels, subset, &self.params)?;
            cache.insert(subset.to_vec(), model);
        }
        Ok(true)
    }

    /// Trains the conflict models for every positive set that occurs on the
    /// training rows, then drops the training rows.
    pub fn finalize(&mut self) -> Result<()> {
        if let Some(store) = self.store.clone() {
            let mut subsets = BTreeSet::new();
            for x in &store.xs {
                let d = self.decision_values(x);
                let p: Vec<usize> = (0..d.len()).filter(|&c| d[c] > 0.0).collect();
                if p.len() >= 2 {
                    subsets.insert(p);
                }
            }
            for s in subsets {
                self.ensure_conflict(&s)?;
            }
        }
        self.store = None;
        Ok(())
    }

    /// Re-attaches raw training vectors so unseen conflict subsets can be
    /// trained lazily again.
    pub fn attach_train_store(&mut self, train: &[FeatureVector]) -> Result<()> {
        let mut xs = Vec::with_capacity(train.len());
        let mut labels = Vec::with_capacity(train.len());
        for (i, v) in train.iter().enumerate() {
            let label = v
                .label
                .as_ref()
                .ok_or_else(|| Error::arg(format!("training vector {i} has no label")))?;
            let c = self
                .classes
                .iter()
                .position(|n| n == label)
                .ok_or_else(|| Error::arg(format!("label `{label}` is not a model class")))?;
            xs.push(self.standardize(&v.values)?);
            labels.push(c);
        }
        self.store = Some(Arc::new(TrainStore { xs, labels }));
        Ok(())
    }

    /// Assembles an ensemble from trained parts. The result holds no
    /// training rows; see [`TwoLayerEnsemble::attach_train_store`].
    pub fn from_parts(
        classes: Vec<String>,
        layout: FeatureLayout,
        params: SvmParams,
        standardizer: Standardizer,
        binaries: Vec<LinearSvm>,
        conflicts: BTreeMap<Vec<usize>, OneVsRest>,
    ) -> Result<Self> {
        if binaries.len() != classes.len() {
            return Err(Error::format(
                "binary",
                format!("{} binaries for {} classes", binaries.len(), classes.len()),
            ));
        }
        for (subset, m) in &conflicts {
            if subset.len() < 2 || subset.iter().any(|&c| c >= classes.len()) || m.classes != *subset {
                return Err(Error::format("conflict", format!("invalid class subset {subset:?}")));
            }
        }
        Ok(Self {
            classes,
            layout,
            params,
            standardizer,
            binaries,
            conflicts: RwLock::new(conflicts),
            store: None,
        })
    }
}
