//! Independent reference implementations shared by integration tests.

#![allow(dead_code)]

use camtrace_core::imaging::Plane;

/// Directed co-occurrence counts by explicit enumeration of in-bounds pairs.
pub fn naive_glcm_counts(p: &Plane, (dr, dc): (isize, isize), levels: usize) -> Vec<Vec<u64>> {
    let q = |v: f64| ((v * levels as f64 / 256.0).floor() as usize).min(levels - 1);
    let mut m = vec![vec![0u64; levels]; levels];
    for y in 0..p.height() as isize {
        for x in 0..p.width() as isize {
            let (y2, x2) = (y + dr, x + dc);
            if y2 < 0 || x2 < 0 || y2 >= p.height() as isize || x2 >= p.width() as isize {
                continue;
            }
            m[q(p.get(y as usize, x as usize))][q(p.get(y2 as usize, x2 as usize))] += 1;
        }
    }
    m
}

/// Entropy, contrast, homogeneity, correlation and energy computed through
/// the marginal distributions.
pub fn naive_glcm_features(counts: &[Vec<u64>]) -> [f64; 5] {
    let levels = counts.len();
    let n = counts.iter().flatten().sum::<u64>() as f64;
    let m: Vec<Vec<f64>> = counts
        .iter()
        .map(|r| r.iter().map(|&c| c as f64 / n).collect())
        .collect();
    let row: Vec<f64> = m.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<f64> = (0..levels).map(|j| m.iter().map(|r| r[j]).sum()).collect();
    let mean = |d: &[f64]| d.iter().enumerate().map(|(i, v)| i as f64 * v).sum::<f64>();
    let (mi, mj) = (mean(&row), mean(&col));
    let var = |d: &[f64], mu: f64| {
        d.iter()
            .enumerate()
            .map(|(i, v)| (i as f64 - mu).powi(2) * v)
            .sum::<f64>()
    };
    let (vi, vj) = (var(&row, mi), var(&col, mj));
    let (mut ent, mut con, mut hom, mut cov, mut en) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, r) in m.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            if v > 0.0 {
                let d = (i as f64 - j as f64).powi(2);
                ent -= v * v.ln();
                con += d * v;
                hom += v / (1.0 + d);
                cov += (i as f64 - mi) * (j as f64 - mj) * v;
                en += v * v;
            }
        }
    }
    // A marginal with a single occupied level has no spread.
    let single = |d: &[f64]| d.iter().filter(|&&v| v > 0.0).count() == 1;
    let corr = if single(&row) || single(&col) {
        1.0
    } else {
        (cov / (vi * vj).sqrt()).clamp(-1.0, 1.0)
    };
    [ent, con, hom, corr, en]
}

pub fn naive_glcm(p: &Plane, offset: (isize, isize), levels: usize) -> [f64; 5] {
    naive_glcm_features(&naive_glcm_counts(p, offset, levels))
}

/// Pearson correlation of two equally sized samples.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Mann-Whitney AUC of `pos` scoring above `neg`, ties counted as half.
pub fn auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for p in pos {
        for n in neg {
            wins += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

/// Exact one-sided sign-test p-value: P(X ≥ wins) for X ~ Binomial(n, 1/2).
pub fn sign_test_p(wins: usize, n: usize) -> f64 {
    let choose = |k: usize| (0..k).fold(1.0f64, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    (wins..=n).map(choose).sum::<f64>() / 2f64.powi(n as i32)
}
