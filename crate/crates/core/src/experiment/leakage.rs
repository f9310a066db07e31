use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{FitScope, RowProvenance, TabularDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Clean,
    Leaky,
}

/// Measured contamination between a train and a test partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    /// Test rows tagged `Synthetic`.
    pub synthetic_rows_in_test: usize,
    /// Test rows tagged `Duplicate`.
    pub duplicated_rows_in_test: usize,
    /// Test rows whose source row also feeds a train row.
    pub shared_sources_across_split: usize,
    /// (train, test) pairs with bit-identical feature vectors.
    pub duplicate_pairs_across_split: usize,
    pub scaler_fitted_on_full_data: bool,
    /// Diagnostic only: test rows within `near_duplicate_radius` of a train row.
    #[serde(default)]
    pub near_duplicate_radius: Option<f64>,
    #[serde(default)]
    pub near_duplicate_test_rows: Option<usize>,
    pub verdict: Verdict,
}

impl LeakageReport {
    fn finish(mut self) -> Self {
        let leaky = self.synthetic_rows_in_test > 0
            || self.duplicated_rows_in_test > 0
            || self.shared_sources_across_split > 0
            || self.duplicate_pairs_across_split > 0
            || self.scaler_fitted_on_full_data;
        self.verdict = if leaky { Verdict::Leaky } else { Verdict::Clean };
        self
    }
}

fn row_key(row: &[f64]) -> Vec<u64> {
    row.iter().map(|v| v.to_bits()).collect()
}

/// Provenance and exact-match leakage between `train` and `test`.
pub fn detect_leakage(train: &TabularDataset, test: &TabularDataset, scaler: FitScope) -> LeakageReport {
    let mut synthetic = 0;
    let mut duplicated = 0;
    for p in test.provenance() {
        match p {
            RowProvenance::Synthetic(_) => synthetic += 1,
            RowProvenance::Duplicate(_) => duplicated += 1,
            RowProvenance::Original(_) => {}
        }
    }

    let train_sources: HashSet<usize> = train.provenance().iter().filter_map(RowProvenance::source_index).collect();
    let shared = test
        .provenance()
        .iter()
        .filter_map(RowProvenance::source_index)
        .filter(|s| train_sources.contains(s))
        .count();

    let mut train_rows: HashMap<Vec<u64>, usize> = HashMap::with_capacity(train.n_rows());
    for row in train.features().rows() {
        *train_rows.entry(row_key(row)).or_default() += 1;
    }
    let pairs = test
        .features()
        .rows()
        .map(|row| train_rows.get(&row_key(row)).copied().unwrap_or(0))
        .sum();

    LeakageReport {
        synthetic_rows_in_test: synthetic,
        duplicated_rows_in_test: duplicated,
        shared_sources_across_split: shared,
        duplicate_pairs_across_split: pairs,
        scaler_fitted_on_full_data: scaler == FitScope::FullDataset,
        near_duplicate_radius: None,
        near_duplicate_test_rows: None,
        verdict: Verdict::Clean,
    }
    .finish()
}

/// Number of test rows with some train row within Euclidean distance `radius`.
pub fn count_near_duplicates(train: &TabularDataset, test: &TabularDataset, radius: f64) -> usize {
    let r2 = radius * radius;
    (0..test.n_rows())
        .into_par_iter()
        .filter(|&i| {
            let t = test.row(i);
            train.features().rows().any(|row| {
                let mut d2 = 0.0;
                for (a, b) in row.iter().zip(t) {
                    d2 += (a - b) * (a - b);
                    if d2 > r2 {
                        return false;
                    }
                }
                true
            })
        })
        .count()
}

/// [`detect_leakage`] plus the near-duplicate diagnostic when `radius` is set.
pub fn detect_leakage_with_radius(
    train: &TabularDataset,
    test: &TabularDataset,
    scaler: FitScope,
    radius: Option<f64>,
) -> LeakageReport {
    let mut report = detect_leakage(train, test, scaler);
    if let Some(r) = radius {
        report.near_duplicate_radius = Some(r);
        report.near_duplicate_test_rows = Some(count_near_duplicates(train, test, r));
    }
    report
}
