//! Tabular datasets with per-row provenance.
//!
//! A [`TabularDataset`] is immutable once built; every operation in this
//! module returns a new value. Row provenance survives all row selections and
//! column transforms so that the leakage detector can later tell original,
//! duplicated and synthetic rows apart.

mod csv_io;
mod features;
mod split;
mod standardize;
mod stats;
mod synthetic;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use csv_io::{load_csv, write_csv, CsvSchema};
pub use features::{engineer_time_features, TimeFeatureMode, DAY_SEGMENT_COLUMNS};
pub use split::{stratified_split, SplitSpec};
pub use standardize::{
    append_scaled_columns, apply_standardizer, fit_standardizer, FitScope, StandardizerParams,
};
pub use stats::{
    amount_summary_by_class, class_distribution, correlation_matrix, ClassDistribution,
    CorrelationMatrix, FiveNumberSummary,
};
pub use synthetic::generate_synthetic_imbalanced;

/// Label of the legitimate (negative) class.
pub const NEGATIVE: u8 = 0;
/// Label of the fraudulent (positive) class.
pub const POSITIVE: u8 = 1;

/// Where a row came from.
///
/// Source indices always refer to a row of the dataset as it was originally
/// loaded or generated, even after several resampling passes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowProvenance {
    Original(usize),
    Duplicate(usize),
    Synthetic(String),
}

impl RowProvenance {
    /// Index of the original row this one was copied from, if any.
    pub fn source_index(&self) -> Option<usize> {
        match self {
            RowProvenance::Original(i) | RowProvenance::Duplicate(i) => Some(*i),
            RowProvenance::Synthetic(_) => None,
        }
    }

    pub fn is_original(&self) -> bool {
        matches!(self, RowProvenance::Original(_))
    }
}

/// Dense row-major matrix of reals. `NaN` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl FeatureMatrix {
    pub fn new(data: Vec<f64>, n_rows: usize, n_cols: usize) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::InvalidDataset(format!(
                "buffer of {} values cannot hold {n_rows} x {n_cols}",
                data.len()
            )));
        }
        Ok(Self {
            data,
            n_rows,
            n_cols,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_cols {
                return Err(Error::InvalidDataset(format!(
                    "row {i} has {} values, expected {n_cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            data,
            n_rows: rows.len(),
            n_cols,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n_cols + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        // chunks_exact panics on a zero chunk size
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.get(r, col)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Feature matrix, binary labels and per-row provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    features: FeatureMatrix,
    feature_names: Vec<String>,
    labels: Vec<u8>,
    provenance: Vec<RowProvenance>,
}

impl TabularDataset {
    pub fn new(
        features: FeatureMatrix,
        feature_names: Vec<String>,
        labels: Vec<u8>,
        provenance: Vec<RowProvenance>,
    ) -> Result<Self> {
        let n = features.n_rows();
        if labels.len() != n || provenance.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{n} feature rows, {} labels, {} provenance tags",
                labels.len(),
                provenance.len()
            )));
        }
        if feature_names.len() != features.n_cols() {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.n_cols()
            )));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate feature name {name:?}"
                )));
            }
        }
        if let Some(pos) = labels.iter().position(|&l| l > 1) {
            return Err(Error::InvalidLabel {
                row: pos,
                value: labels[pos].to_string(),
            });
        }
        if let Some(pos) = provenance
            .iter()
            .position(|p| matches!(p, RowProvenance::Synthetic(m) if m.is_empty()))
        {
            return Err(Error::InvalidDataset(format!(
                "row {pos}: synthetic provenance without a method name"
            )));
        }
        Ok(Self {
            features,
            feature_names,
            labels,
            provenance,
        })
    }

    /// Builds a dataset whose rows are all `Original(i)`.
    pub fn from_original(
        features: FeatureMatrix,
        feature_names: Vec<String>,
        labels: Vec<u8>,
    ) -> Result<Self> {
        let provenance = (0..features.n_rows()).map(RowProvenance::Original).collect();
        Self::new(features, feature_names, labels, provenance)
    }

    pub fn n_rows(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows() == 0
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn provenance(&self) -> &[RowProvenance] {
        &self.provenance
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub(crate) fn require_column(&self, name: &str) -> Result<usize> {
        self.column_index(name)
            .ok_or_else(|| Error::ColumnMissing(name.to_string()))
    }

    /// Row counts as `[negatives, positives]`.
    pub fn class_counts(&self) -> [usize; 2] {
        let pos = self.labels.iter().filter(|&&l| l == POSITIVE).count();
        [self.labels.len() - pos, pos]
    }

    /// Indices of all rows with the given label, in row order.
    pub fn class_indices(&self, class: u8) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == class).then_some(i))
            .collect()
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let d = self.n_features();
        let mut data = Vec::with_capacity(indices.len() * d);
        let mut labels = Vec::with_capacity(indices.len());
        let mut provenance = Vec::with_capacity(indices.len());
        for &i in indices {
            data.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
            provenance.push(self.provenance[i].clone());
        }
        Self {
            features: FeatureMatrix {
                data,
                n_rows: indices.len(),
                n_cols: d,
            },
            feature_names: self.feature_names.clone(),
            labels,
            provenance,
        }
    }

    /// Appends rows (flattened, row-major) to a copy of this dataset.
    pub(crate) fn with_appended(
        &self,
        rows: Vec<f64>,
        labels: Vec<u8>,
        provenance: Vec<RowProvenance>,
    ) -> Self {
        debug_assert_eq!(rows.len(), labels.len() * self.n_features());
        debug_assert_eq!(labels.len(), provenance.len());
        let mut out = self.clone();
        out.features.data.extend(rows);
        out.features.n_rows += labels.len();
        out.labels.extend(labels);
        out.provenance.extend(provenance);
        out
    }

    /// Replaces the feature block, keeping labels and provenance.
    pub(crate) fn with_features(&self, features: FeatureMatrix, names: Vec<String>) -> Result<Self> {
        Self::new(features, names, self.labels.clone(), self.provenance.clone())
    }
}
