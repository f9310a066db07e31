//! Histogram bins for split finding.
//!
//! Each feature gets an ascending list of cut values. A value `x` falls in
//! bin `#{cuts <= x}`, so "bin <= j" is the same predicate as `x < cuts[j]`,
//! which is how trained trees route rows at prediction time.

use rayon::prelude::*;

use crate::dataset::FeatureMatrix;

pub(crate) const MISSING_BIN: u16 = u16::MAX;
pub(crate) const MAX_BINS: usize = u16::MAX as usize;

/// Cut values for one feature.
///
/// With at most `n_bins` distinct values the cuts are midpoints between
/// neighbouring values (exact greedy). Otherwise they are the
/// `j / n_bins` quantiles of the non-missing values, deduplicated.
pub fn bin_cuts(values: &[f64], n_bins: usize) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    if sorted.is_empty() {
        return Vec::new();
    }
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();

    if distinct.len() <= n_bins {
        return distinct
            .windows(2)
            .map(|w| {
                let mid = w[0] + (w[1] - w[0]) / 2.0;
                // adjacent floats: the midpoint can round down onto w[0]
                if mid > w[0] {
                    mid
                } else {
                    w[1]
                }
            })
            .collect();
    }

    let n = sorted.len();
    let mut cuts: Vec<f64> = (1..n_bins)
        .map(|j| sorted[(j * n / n_bins).min(n - 1)])
        .filter(|&v| v > sorted[0])
        .collect();
    cuts.dedup();
    cuts
}

/// Column-major bin indices of a training matrix.
#[derive(Debug, Clone)]
pub(crate) struct BinnedMatrix {
    pub(crate) cuts: Vec<Vec<f64>>,
    /// `columns[f][row]`
    pub(crate) columns: Vec<Vec<u16>>,
}

impl BinnedMatrix {
    pub(crate) fn build(features: &FeatureMatrix, n_bins: usize) -> Self {
        let (cuts, columns) = (0..features.n_cols())
            .into_par_iter()
            .map(|f| {
                let col = features.column(f);
                let cuts = bin_cuts(&col, n_bins);
                let bins = col.iter().map(|&x| bin_of(&cuts, x)).collect();
                (cuts, bins)
            })
            .unzip();
        Self { cuts, columns }
    }

    pub(crate) fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub(crate) fn n_bins(&self, feature: usize) -> usize {
        self.cuts[feature].len() + 1
    }
}

pub(crate) fn bin_of(cuts: &[f64], x: f64) -> u16 {
    if x.is_nan() {
        MISSING_BIN
    } else {
        cuts.partition_point(|&c| c <= x) as u16
    }
}
