//! Independent reference implementations shared by the integration suites.
//!
//! Nothing here calls into the library's internals; each oracle recomputes
//! its quantity from the definition.

#![allow(dead_code)]

/// Counts as (tp, fp, tn, fn) via a per-row tally.
pub fn tally(labels: &[u8], preds: &[u8]) -> (u64, u64, u64, u64) {
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&y, &p) in labels.iter().zip(preds) {
        match (y, p) {
            (1, 1) => tp += 1,
            (0, 1) => fp += 1,
            (0, 0) => tn += 1,
            (1, 0) => fn_ += 1,
            _ => panic!("non-binary value"),
        }
    }
    (tp, fp, tn, fn_)
}

/// Textbook formulas with zero-denominator cases mapped to 0.
pub struct NaiveScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub mcc: f64,
}

pub fn naive_scores(labels: &[u8], preds: &[u8]) -> NaiveScores {
    let (tp, fp, tn, fn_) = tally(labels, preds);
    let (tp, fp, tn, fn_) = (tp as f64, fp as f64, tn as f64, fn_ as f64);
    let div = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
    let precision = div(tp, tp + fp);
    let recall = div(tp, tp + fn_);
    let f1 = div(2.0 * precision * recall, precision + recall);
    let accuracy = (tp + tn) / (tp + fp + tn + fn_);
    let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    let mcc = div(tp * tn - fp * fn_, den);
    NaiveScores { precision, recall, f1, accuracy, mcc }
}

/// Area under a polyline of (fpr, tpr) points by the trapezoid rule.
pub fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// Probability a random positive outscores a random negative, ties half.
pub fn pairwise_auc(labels: &[u8], scores: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &yi) in labels.iter().enumerate() {
        if yi != 1 {
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Indices of the `k` nearest other points to `points[i]`, ties to lower index.
pub fn brute_knn(points: &[Vec<f64>], i: usize, k: usize) -> Vec<usize> {
    let mut others: Vec<(f64, usize)> = (0..points.len())
        .filter(|&j| j != i)
        .map(|j| (dist(&points[i], &points[j]), j))
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    others.into_iter().take(k).map(|(_, j)| j).collect()
}

/// Brute-force `k` nearest neighbours of every point.
pub fn brute_knn_all(points: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    (0..points.len()).map(|i| brute_knn(points, i, k)).collect()
}

/// True when `s` lies on the segment from some minority `a` to one of its
/// nearest minority neighbours listed in `neighbors[a]`.
pub fn on_some_neighbor_segment(s: &[f64], minority: &[Vec<f64>], neighbors: &[Vec<usize>], tol: f64) -> bool {
    (0..minority.len()).any(|a| {
        neighbors[a].iter().any(|&b| {
            let (pa, pb) = (&minority[a], &minority[b]);
            (dist(pa, s) + dist(s, pb) - dist(pa, pb)).abs() <= tol
        })
    })
}

pub fn soft(g: f64, alpha: f64) -> f64 {
    g.signum() * (g.abs() - alpha).max(0.0)
}

pub fn oracle_leaf(g: f64, h: f64, lambda: f64, alpha: f64) -> f64 {
    -soft(g, alpha) / (h + lambda)
}

/// Exhaustive split search on raw values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSplit {
    pub feature: usize,
    pub threshold: f64,
    pub missing_left: bool,
    pub gain: f64,
}

/// Tries every feature, every midpoint between consecutive distinct values,
/// and both sides for missing rows. Order of preference on equal gain:
/// lower feature, lower threshold, missing-left.
pub fn exhaustive_split(
    rows: &[Vec<f64>],
    grad: &[f64],
    hess: &[f64],
    lambda: f64,
    alpha: f64,
    min_child_weight: f64,
) -> Option<OracleSplit> {
    let score = |g: f64, h: f64| soft(g, alpha).powi(2) / (h + lambda);
    let g_all: f64 = grad.iter().sum();
    let h_all: f64 = hess.iter().sum();
    let mut best: Option<OracleSplit> = None;
    for f in 0..rows[0].len() {
        let mut vals: Vec<f64> = rows.iter().map(|r| r[f]).filter(|v| !v.is_nan()).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        let has_missing = rows.iter().any(|r| r[f].is_nan());
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            for missing_left in [true, false] {
                if !missing_left && !has_missing {
                    continue;
                }
                let (mut gl, mut hl) = (0.0, 0.0);
                for (i, r) in rows.iter().enumerate() {
                    let left = if r[f].is_nan() { missing_left } else { r[f] < t };
                    if left {
                        gl += grad[i];
                        hl += hess[i];
                    }
                }
                let (gr, hr) = (g_all - gl, h_all - hl);
                if hl < min_child_weight || hr < min_child_weight {
                    continue;
                }
                let gain = 0.5 * (score(gl, hl) + score(gr, hr) - score(g_all, h_all));
                if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
                    best = Some(OracleSplit { feature: f, threshold: t, missing_left, gain });
                }
            }
        }
    }
    best
}
