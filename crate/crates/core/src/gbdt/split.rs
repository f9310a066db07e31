//! Regularized Newton objective and histogram split search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binning::{BinnedMatrix, MISSING_BIN};
use super::GbdtParams;

/// Rows × features below which histograms are built on one thread.
const PARALLEL_WORK: usize = 1 << 15;

/// L1 soft-threshold `sign(g) · max(|g| − alpha, 0)`.
pub fn soft_threshold(g: f64, alpha: f64) -> f64 {
    if g > alpha {
        g - alpha
    } else if g < -alpha {
        g + alpha
    } else {
        0.0
    }
}

/// Optimal leaf weight `−S(G) / (H + λ)`; 0 when the denominator vanishes.
pub fn leaf_weight(g: f64, h: f64, lambda: f64, alpha: f64) -> f64 {
    let den = h + lambda;
    if den <= 0.0 {
        0.0
    } else {
        -soft_threshold(g, alpha) / den
    }
}

/// `S(G)² / (H + λ)`, twice the objective reduction of an optimal leaf.
fn leaf_score(g: f64, h: f64, lambda: f64, alpha: f64) -> f64 {
    let s = soft_threshold(g, alpha);
    s * s / (h + lambda)
}

/// `½ [score(L) + score(R) − score(L ∪ R)]`.
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, alpha: f64) -> f64 {
    0.5 * (leaf_score(gl, hl, lambda, alpha) + leaf_score(gr, hr, lambda, alpha)
        - leaf_score(gl + gr, hl + hr, lambda, alpha))
}

/// Best split found for a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub feature: usize,
    /// Rows with `x < threshold` go left.
    pub threshold: f64,
    /// Index of `threshold` among the feature's cut values.
    pub cut_index: usize,
    pub missing_goes_left: bool,
    pub gain: f64,
    pub left_grad: f64,
    pub left_hess: f64,
    pub right_grad: f64,
    pub right_hess: f64,
}

#[derive(Clone, Copy, Default)]
struct GradPair {
    g: f64,
    h: f64,
}

/// Scans every (feature, cut, missing direction) for the node holding `rows`.
///
/// Candidates are visited by ascending feature, then ascending cut, then
/// missing-left before missing-right; a later candidate wins only with a
/// strictly larger gain. The result does not depend on the thread count.
pub(crate) fn best_split(
    binned: &BinnedMatrix,
    rows: &[u32],
    grad: &[f64],
    hess: &[f64],
    params: &GbdtParams,
) -> Option<SplitCandidate> {
    let (total_g, total_h) = rows.iter().fold((0.0, 0.0), |(g, h), &r| {
        (g + grad[r as usize], h + hess[r as usize])
    });
    let per_feature = |f: usize| best_for_feature(binned, f, rows, grad, hess, total_g, total_h, params);
    let bests: Vec<Option<SplitCandidate>> = if rows.len() * binned.n_features() >= PARALLEL_WORK {
        (0..binned.n_features()).into_par_iter().map(per_feature).collect()
    } else {
        (0..binned.n_features()).map(per_feature).collect()
    };
    bests.into_iter().flatten().fold(None, |best: Option<SplitCandidate>, c| match best {
        Some(b) if b.gain >= c.gain => Some(b),
        _ => Some(c),
    })
}

#[allow(clippy::too_many_arguments)]
fn best_for_feature(
    binned: &BinnedMatrix,
    feature: usize,
    rows: &[u32],
    grad: &[f64],
    hess: &[f64],
    total_g: f64,
    total_h: f64,
    params: &GbdtParams,
) -> Option<SplitCandidate> {
    let n_bins = binned.n_bins(feature);
    if n_bins < 2 {
        return None;
    }
    let bins = &binned.columns[feature];
    let mut hist = vec![GradPair::default(); n_bins];
    let mut missing = GradPair::default();
    let mut n_missing = 0usize;
    for &r in rows {
        let r = r as usize;
        let b = bins[r];
        let slot = if b == MISSING_BIN {
            n_missing += 1;
            &mut missing
        } else {
            &mut hist[b as usize]
        };
        slot.g += grad[r];
        slot.h += hess[r];
    }

    let (lambda, alpha, mcw) = (params.lambda_l2, params.alpha_l1, params.min_child_weight);
    let directions: &[bool] = if n_missing > 0 { &[true, false] } else { &[true] };
    let mut best: Option<SplitCandidate> = None;
    let mut acc = GradPair::default();
    for (cut_index, bin) in hist[..n_bins - 1].iter().enumerate() {
        acc.g += bin.g;
        acc.h += bin.h;
        for &missing_left in directions {
            let (gl, hl) = if missing_left {
                (acc.g + missing.g, acc.h + missing.h)
            } else {
                (acc.g, acc.h)
            };
            let (gr, hr) = (total_g - gl, total_h - hl);
            if hl < mcw || hr < mcw || hl + lambda <= 0.0 || hr + lambda <= 0.0 {
                continue;
            }
            let gain = split_gain(gl, hl, gr, hr, lambda, alpha);
            if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
                best = Some(SplitCandidate {
                    feature,
                    threshold: binned.cuts[feature][cut_index],
                    cut_index,
                    missing_goes_left: missing_left,
                    gain,
                    left_grad: gl,
                    left_hess: hl,
                    right_grad: gr,
                    right_hess: hr,
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaf_weight_examples() {
        assert!((leaf_weight(2.0, 4.0, 1.0, 0.0) + 0.4).abs() < 1e-15);
        assert!((leaf_weight(2.0, 4.0, 1.0, 0.6) + 0.28).abs() < 1e-15);
        assert_eq!(leaf_weight(0.5, 4.0, 1.0, 0.6), 0.0);
        assert_eq!(leaf_weight(-2.0, 3.0, 1.0, 1.0), 0.25);
        assert_eq!(leaf_weight(1.0, 0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn gain_is_zero_for_identical_children() {
        // children with the same G/H ratio: no improvement without regularization
        assert!(split_gain(1.0, 2.0, 2.0, 4.0, 0.0, 0.0).abs() < 1e-15);
        assert!(split_gain(3.0, 1.0, -3.0, 1.0, 1.0, 0.0) > 0.0);
    }
}
