//! Accuracy measures for estimated correlation matrices, recovered graphs
//! and class fractions, plus the potential scale reduction diagnostic.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::EdgeMask;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MatrixErrors {
    pub max: f64,
    pub spectral: f64,
    pub frobenius: f64,
}

/// Element-wise maximum, spectral and Frobenius norms of `estimate − truth`.
pub fn matrix_error_norms(estimate: &DMatrix<f64>, truth: &DMatrix<f64>) -> Result<MatrixErrors> {
    if estimate.shape() != truth.shape() {
        return Err(Error::InvalidParameter(format!(
            "shapes differ: {:?} vs {:?}",
            estimate.shape(),
            truth.shape()
        )));
    }
    let d = estimate - truth;
    Ok(MatrixErrors {
        max: d.amax(),
        spectral: d.clone().singular_values().max(),
        frobenius: d.norm(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphRecoveryResult {
    /// Descending thresholds; a pair is called an edge when its score is at
    /// least the threshold.
    pub threshold_grid: Vec<f64>,
    /// Curves start at (0, 0) for an infinite threshold, then follow the grid.
    pub fpr_curve: Vec<f64>,
    pub tpr_curve: Vec<f64>,
    pub auc: f64,
    pub max_f1: f64,
}

/// ROC curve, trapezoidal AUC and best F1 of edge scores against a true
/// graph. Pairs in `exclude` (for example edges fixed by design) are left out.
pub fn graph_recovery(
    scores: &DMatrix<f64>,
    truth: &EdgeMask,
    exclude: Option<&EdgeMask>,
) -> Result<GraphRecoveryResult> {
    let p = truth.p();
    if scores.shape() != (p, p) {
        return Err(Error::InvalidParameter("score matrix does not match the graph".into()));
    }
    let mut pairs: Vec<(f64, bool)> = Vec::new();
    for j in 0..p {
        for k in (j + 1)..p {
            if exclude.is_some_and(|m| m.get(j, k)) {
                continue;
            }
            let s = scores[(j, k)];
            if s.is_nan() {
                return Err(Error::InvalidParameter(format!("score ({j}, {k}) is NaN")));
            }
            pairs.push((s, truth.get(j, k)));
        }
    }
    let positives = pairs.iter().filter(|x| x.1).count();
    let negatives = pairs.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedRate(format!(
            "{positives} true edges among {} candidate pairs",
            pairs.len()
        )));
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut grid = Vec::new();
    let mut fpr = vec![0.0];
    let mut tpr = vec![0.0];
    let mut max_f1: f64 = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let t = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == t {
            if pairs[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        grid.push(t);
        fpr.push(fp as f64 / negatives as f64);
        tpr.push(tp as f64 / positives as f64);
        let f_n = positives - tp;
        max_f1 = max_f1.max(2.0 * tp as f64 / (2 * tp + fp + f_n) as f64);
    }
    let auc = fpr
        .windows(2)
        .zip(tpr.windows(2))
        .map(|(f, t)| (f[1] - f[0]) * (t[1] + t[0]) / 2.0)
        .sum();
    Ok(GraphRecoveryResult {
        threshold_grid: grid,
        fpr_curve: fpr,
        tpr_curve: tpr,
        auc,
        max_f1,
    })
}

/// `1 − Σ|π_true − π̂| / (2(1 − min π_true))`.
pub fn csmf_accuracy(estimate: &DVector<f64>, truth: &DVector<f64>) -> Result<f64> {
    const TOL: f64 = 1e-6;
    if estimate.len() != truth.len() || truth.len() < 2 {
        return Err(Error::InvalidParameter("fraction vectors must have equal length >= 2".into()));
    }
    for (name, v) in [("estimate", estimate), ("truth", truth)] {
        if v.iter().any(|&x| x < -TOL) || (v.sum() - 1.0).abs() > TOL {
            return Err(Error::InvalidParameter(format!("{name} is not on the simplex")));
        }
    }
    let min = truth.min();
    let dist: f64 = estimate.iter().zip(truth.iter()).map(|(a, b)| (a - b).abs()).sum();
    Ok((1.0 - dist / (2.0 * (1.0 - min))).clamp(0.0, 1.0))
}

/// Fraction of rows whose true class is among their `k` most probable
/// classes. Ties go to the lower class index.
pub fn top_k_accuracy(probs: &DMatrix<f64>, labels: &[usize], k: usize) -> Result<f64> {
    if probs.nrows() != labels.len() || probs.nrows() == 0 {
        return Err(Error::InvalidParameter("one label per row is required".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let hits = probs
        .row_iter()
        .zip(labels)
        .filter(|(row, &y)| {
            let mut order: Vec<usize> = (0..row.len()).collect();
            order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            order.iter().take(k).any(|&c| c == y)
        })
        .count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Potential scale reduction factor `sqrt(V̂ / W)` with
/// `V̂ = (n − 1)/n · W + B/n`.
pub fn gelman_rubin(chains: &[Vec<f64>]) -> Result<f64> {
    let m = chains.len();
    if m < 2 {
        return Err(Error::InvalidParameter("at least two chains are required".into()));
    }
    let n = chains[0].len();
    if n < 10 || chains.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidParameter("chains must have equal length of at least 10".into()));
    }
    let means: Vec<f64> = chains.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    let grand = means.iter().sum::<f64>() / m as f64;
    let b = n as f64 / (m - 1) as f64 * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let w = chains
        .iter()
        .zip(&means)
        .map(|(c, mean)| c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64)
        .sum::<f64>()
        / m as f64;
    if !(w > 0.0) {
        return Err(Error::Degenerate("within-chain variance is zero".into()));
    }
    let v = (n - 1) as f64 / n as f64 * w + b / n as f64;
    Ok((v / w).sqrt())
}
