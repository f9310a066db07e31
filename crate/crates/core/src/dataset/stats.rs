use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::TabularDataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub negative: usize,
    pub positive: usize,
    pub minority_fraction: f64,
}

pub fn class_distribution(dataset: &TabularDataset) -> Result<ClassDistribution> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let [negative, positive] = dataset.class_counts();
    Ok(ClassDistribution {
        negative,
        positive,
        minority_fraction: negative.min(positive) as f64 / dataset.n_rows() as f64,
    })
}

/// Box-plot summary. Quartiles use linear interpolation between order
/// statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumberSummary {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumberSummary {
    fn of(mut values: Vec<f64>) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        values.sort_by(f64::total_cmp);
        Some(Self {
            count: values.len(),
            min: values[0],
            q1: quantile_sorted(&values, 0.25),
            median: quantile_sorted(&values, 0.5),
            q3: quantile_sorted(&values, 0.75),
            max: values[values.len() - 1],
        })
    }
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Per-class summary of one column, indexed by label. A class with no rows
/// yields `None`.
pub fn amount_summary_by_class(
    dataset: &TabularDataset,
    column: &str,
) -> Result<[Option<FiveNumberSummary>; 2]> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let c = dataset.require_column(column)?;
    let mut by_class = [Vec::new(), Vec::new()];
    for (row, &l) in dataset.features().rows().zip(dataset.labels()) {
        by_class[l as usize].push(row[c]);
    }
    let [neg, pos] = by_class;
    Ok([FiveNumberSummary::of(neg), FiveNumberSummary::of(pos)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    /// Row-major `names.len()²` Pearson coefficients.
    pub values: Vec<f64>,
    /// Columns with zero variance; their off-diagonal entries are 0.
    pub constant_columns: Vec<String>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.names.len() + j]
    }
}

/// Pearson correlations between all feature columns.
pub fn correlation_matrix(dataset: &TabularDataset) -> Result<CorrelationMatrix> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if dataset.n_rows() < 2 {
        return Err(Error::InvalidDataset("correlation needs at least 2 rows".into()));
    }
    let d = dataset.n_features();
    let n = dataset.n_rows() as f64;
    let centered: Vec<Vec<f64>> = (0..d)
        .map(|c| {
            let col = dataset.features().column(c);
            let m = col.iter().sum::<f64>() / n;
            col.into_iter().map(|v| v - m).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let constant: Vec<bool> = (0..d)
        .map(|c| {
            let col = dataset.features().column(c);
            col.iter().all(|&v| v == col[0])
        })
        .collect();

    let mut values = vec![0.0; d * d];
    for i in 0..d {
        values[i * d + i] = 1.0;
        for j in (i + 1)..d {
            let r = if constant[i] || constant[j] {
                0.0
            } else {
                let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
                (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0)
            };
            values[i * d + j] = r;
            values[j * d + i] = r;
        }
    }
    Ok(CorrelationMatrix {
        names: dataset.feature_names().to_vec(),
        values,
        constant_columns: (0..d)
            .filter(|&c| constant[c])
            .map(|c| dataset.feature_names()[c].clone())
            .collect(),
    })
}
