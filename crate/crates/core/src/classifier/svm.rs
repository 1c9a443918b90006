//! Linear soft-margin SVM trained by full-batch subgradient descent.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::manipulation::keyed_rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            epochs: 2000,
            seed: 0,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::arg(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.epochs == 0 {
            return Err(Error::arg("epochs must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearSvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) > 0.0
    }
}

/// Minimizes `λ/2·‖(w, b)‖² + mean hinge loss` with step `1/(λt)`.
///
/// Each epoch takes one full-batch subgradient step; the seeded shuffle only
/// fixes the summation order. The bias is treated as an extra weight on a
/// constant input, which keeps the objective symmetric under `(x, y) → (−x, −y)`.
/// The returned model averages the iterates of the second half of training.
pub fn train_binary(xs: &[Vec<f64>], ys: &[bool], params: &SvmParams) -> Result<LinearSvm> {
    params.validate()?;
    if xs.len() != ys.len() {
        return Err(Error::arg(format!("{} vectors but {} labels", xs.len(), ys.len())));
    }
    if !ys.iter().any(|&y| y) || ys.iter().all(|&y| y) {
        return Err(Error::arg("binary training needs both positive and negative examples"));
    }
    let d = xs[0].len();
    if xs.iter().any(|x| x.len() != d) {
        return Err(Error::arg("feature vectors differ in length"));
    }

    let n = xs.len() as f64;
    let lambda = params.lambda;
    let radius = 1.0 / lambda.sqrt();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.shuffle(&mut keyed_rng(params.seed, 0));

    // Augmented weight vector; the last entry is the bias.
    let mut w = vec![0.0; d + 1];
    let mut avg = vec![0.0; d + 1];
    let avg_from = params.epochs / 2 + 1;
    let mut grad = vec![0.0; d + 1];
    for t in 1..=params.epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for &i in &order {
            let x = &xs[i];
            let y = if ys[i] { 1.0 } else { -1.0 };
            let margin = y * (w[..d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[d]);
            if margin < 1.0 {
                for (g, v) in grad.iter_mut().zip(x) {
                    *g += y * v;
                }
                grad[d] += y;
            }
        }
        let eta = 1.0 / (lambda * t as f64);
        let shrink = 1.0 - eta * lambda;
        for (wi, g) in w.iter_mut().zip(&grad) {
            *wi = shrink * *wi + eta * g / n;
        }
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > radius {
            let s = radius / norm;
            w.iter_mut().for_each(|v| *v *= s);
        }
        if t >= avg_from {
            for (a, v) in avg.iter_mut().zip(&w) {
                *a += v;
            }
        }
    }
    let count = (params.epochs - avg_from + 1) as f64;
    avg.iter_mut().for_each(|a| *a /= count);
    let bias = avg.pop().expect("augmented vector");
    if avg.iter().any(|v| !v.is_finite()) || !bias.is_finite() {
        return Err(Error::State("SVM training diverged".into()));
    }
    Ok(LinearSvm { weights: avg, bias })
}

/// One binary model per class; prediction is the argmax of decision values
/// with ties going to the earlier class.
#[derive(Clone, Debug, PartialEq)]
pub struct OneVsRest {
    /// Class ids, ascending.
    pub classes: Vec<usize>,
    pub models: Vec<LinearSvm>,
}

impl OneVsRest {
    /// Trains on the rows whose label is in `classes`. Binary `k` uses the
    /// shuffle stream of class `classes[k]`.
    pub fn train(xs: &[Vec<f64>], labels: &[usize], classes: &[usize], params: &SvmParams) -> Result<Self> {
        let mut classes = classes.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::arg("one-vs-rest needs at least 2 classes"));
        }
        let (sub_x, sub_y): (Vec<Vec<f64>>, Vec<usize>) = xs
            .iter()
            .zip(labels)
            .filter(|(_, l)| classes.contains(l))
            .map(|(x, &l)| (x.clone(), l))
            .unzip();
        for &c in &classes {
            if !sub_y.contains(&c) {
                return Err(Error::arg(format!("class {c} has no training data")));
            }
        }
        let models = classes
            .iter()
            .map(|&c| {
                let ys: Vec<bool> = sub_y.iter().map(|&l| l == c).collect();
                train_binary(&sub_x, &ys, &class_params(params, c))
            })
            .collect::<Result<_>>()?;
        Ok(Self { classes, models })
    }

    pub fn decisions(&self, x: &[f64]) -> Vec<f64> {
        self.models.iter().map(|m| m.decision(x)).collect()
    }

    /// `(class id, decision value)` of the winner.
    pub fn predict(&self, x: &[f64]) -> (usize, f64) {
        let d = self.decisions(x);
        let k = argmax(&d);
        (self.classes[k], d[k])
    }
}

/// Per-class seed so every binary gets its own shuffle order.
pub(crate) fn class_params(params: &SvmParams, class: usize) -> SvmParams {
    SvmParams {
        seed: params.seed ^ (class as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        ..*params
    }
}

/// First index of the maximum.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_data() -> (Vec<Vec<f64>>, Vec<bool>) {
        let xs = (0..40).map(|i| vec![if i < 20 { 1.0 } else { -1.0 }]).collect();
        let ys = (0..40).map(|i| i < 20).collect();
        (xs, ys)
    }

    #[test]
    fn separates_points_on_a_line() {
        let (xs, ys) = line_data();
        let m = train_binary(&xs, &ys, &SvmParams::default()).unwrap();
        assert!(m.weights[0] > m.bias.abs());
        assert!(xs.iter().zip(&ys).all(|(x, &y)| m.predict(x) == y));
    }

    #[test]
    fn symmetric_data_has_zero_bias() {
        let pos: Vec<Vec<f64>> = (0..15)
            .map(|i| vec![1.0 + (i as f64 * 0.37).sin(), (i as f64).cos()])
            .collect();
        let mut xs = pos.clone();
        xs.extend(pos.iter().map(|x| x.iter().map(|v| -v).collect::<Vec<_>>()));
        let ys: Vec<bool> = (0..30).map(|i| i < 15).collect();
        let m = train_binary(
            &xs,
            &ys,
            &SvmParams {
                seed: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(m.bias.abs() < 1e-6, "bias {}", m.bias);
    }

    #[test]
    fn duplicated_data_gives_same_boundary() {
        let xs: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                vec![
                    (i as f64 * 0.7).sin() + if i % 2 == 0 { 0.8 } else { -0.8 },
                    (i as f64 * 1.3).cos(),
                ]
            })
            .collect();
        let ys: Vec<bool> = (0..30).map(|i| i % 2 == 0).collect();
        let a = train_binary(&xs, &ys, &SvmParams::default()).unwrap();
        let (xs2, ys2): (Vec<_>, Vec<_>) = xs.iter().chain(&xs).cloned().zip(ys.iter().chain(&ys).copied()).unzip();
        let b = train_binary(&xs2, &ys2, &SvmParams::default()).unwrap();
        for x in &xs {
            assert!((a.decision(x) - b.decision(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn training_errors() {
        let (xs, _) = line_data();
        assert!(train_binary(&xs, &[true; 40], &SvmParams::default()).is_err());
        assert!(train_binary(&xs, &[true], &SvmParams::default()).is_err());
        let (xs, ys) = line_data();
        assert!(train_binary(
            &xs,
            &ys,
            &SvmParams {
                lambda: 0.0,
                ..Default::default()
            }
        )
        .is_err());
        assert!(train_binary(
            &xs,
            &ys,
            &SvmParams {
                epochs: 0,
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn one_vs_rest_and_ties() {
        let centers = [(3.0, 0.0), (-3.0, 0.0), (0.0, 3.0)];
        let mut xs = Vec::new();
        let mut labels = Vec::new();
        for (c, &(cx, cy)) in centers.iter().enumerate() {
            for i in 0..10 {
                let a = i as f64 * 0.6;
                xs.push(vec![cx + 0.3 * a.cos(), cy + 0.3 * a.sin()]);
                labels.push(c);
            }
        }
        let ovr = OneVsRest::train(&xs, &labels, &[2, 0, 1], &SvmParams::default()).unwrap();
        assert_eq!(ovr.classes, vec![0, 1, 2]);
        assert!(xs.iter().zip(&labels).all(|(x, &l)| ovr.predict(x).0 == l));
        let pair = OneVsRest::train(&xs, &labels, &[0, 1], &SvmParams::default()).unwrap();
        assert!(xs
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| l < 2)
            .all(|(x, &l)| pair.predict(x).0 == l));
        assert!(OneVsRest::train(&xs, &labels, &[0, 7], &SvmParams::default()).is_err());
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
    }
}
