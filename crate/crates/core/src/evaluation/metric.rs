use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weight of a correct prediction on an untouched test image.
pub const UNALTERED_WEIGHT: f64 = 0.7;
/// Weight of a correct prediction on an altered test image.
pub const ALTERED_WEIGHT: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedAccuracyReport {
    pub weighted_accuracy: f64,
    pub per_class_accuracy: BTreeMap<String, f64>,
    /// `None` when the test set holds no unaltered samples.
    pub unaltered_accuracy: Option<f64>,
    pub altered_accuracy: Option<f64>,
    /// `confusion[truth][predicted]`, rows/columns in `classes` order.
    pub confusion: Vec<Vec<u64>>,
    pub classes: Vec<String>,
    pub samples: usize,
    pub altered_samples: usize,
}

impl WeightedAccuracyReport {
    /// Pretty JSON with lexicographically sorted keys.
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::format("report", e.to_string()))?;
        let mut s = serde_json::to_string_pretty(&value).map_err(|e| Error::format("report", e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

/// Weighted categorization accuracy with numeric class names `0..k`.
pub fn weighted_accuracy(preds: &[usize], truth: &[usize], altered: &[bool]) -> Result<WeightedAccuracyReport> {
    let k = preds.iter().chain(truth).copied().max().map_or(0, |m| m + 1);
    let labels: Vec<String> = (0..k).map(|c| c.to_string()).collect();
    weighted_accuracy_labeled(preds, truth, altered, &labels)
}

/// `Σ w_i·[pred_i = truth_i] / Σ w_i` with `w = 0.7` for unaltered and `0.3`
/// for altered samples, plus per-class, per-subset and confusion breakdowns.
pub fn weighted_accuracy_labeled(
    preds: &[usize],
    truth: &[usize],
    altered: &[bool],
    classes: &[String],
) -> Result<WeightedAccuracyReport> {
    if preds.is_empty() {
        return Err(Error::arg("weighted accuracy needs at least one sample"));
    }
    if preds.len() != truth.len() || preds.len() != altered.len() {
        return Err(Error::arg(format!(
            "length mismatch: {} predictions, {} labels, {} altered flags",
            preds.len(),
            truth.len(),
            altered.len()
        )));
    }
    let k = classes.len();
    if let Some(bad) = preds.iter().chain(truth).find(|&&c| c >= k) {
        return Err(Error::arg(format!("class id {bad} out of range for {k} classes")));
    }

    let mut confusion = vec![vec![0u64; k]; k];
    let (mut hit_weight, mut total_weight) = (0.0, 0.0);
    // (correct, total) for unaltered and altered subsets.
    let mut subsets = [(0usize, 0usize); 2];
    for ((&p, &t), &alt) in preds.iter().zip(truth).zip(altered) {
        let w = if alt { ALTERED_WEIGHT } else { UNALTERED_WEIGHT };
        let hit = p == t;
        total_weight += w;
        if hit {
            hit_weight += w;
        }
        let s = &mut subsets[usize::from(alt)];
        s.1 += 1;
        s.0 += usize::from(hit);
        confusion[t][p] += 1;
    }
    let ratio = |(c, n): (usize, usize)| (n > 0).then(|| c as f64 / n as f64);
    let per_class_accuracy = classes
        .iter()
        .enumerate()
        .filter_map(|(c, name)| {
            let row_total: u64 = confusion[c].iter().sum();
            (row_total > 0).then(|| (name.clone(), confusion[c][c] as f64 / row_total as f64))
        })
        .collect();
    Ok(WeightedAccuracyReport {
        weighted_accuracy: hit_weight / total_weight,
        per_class_accuracy,
        unaltered_accuracy: ratio(subsets[0]),
        altered_accuracy: ratio(subsets[1]),
        confusion,
        classes: classes.to_vec(),
        samples: preds.len(),
        altered_samples: subsets[1].1,
    })
}
