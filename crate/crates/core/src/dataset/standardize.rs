use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{FeatureMatrix, TabularDataset};

/// Which rows a standardizer was fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitScope {
    TrainOnly,
    FullDataset,
}

/// Per-column mean and population standard deviation.
///
/// A column with zero spread is recorded with `std_dev = 0` and passed
/// through unscaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizerParams {
    pub columns: Vec<String>,
    pub mean: Vec<f64>,
    pub std_dev: Vec<f64>,
    pub fitted_on: FitScope,
}

impl StandardizerParams {
    fn transform(&self, k: usize, v: f64) -> f64 {
        let sd = self.std_dev[k];
        if sd > 0.0 {
            (v - self.mean[k]) / sd
        } else {
            v
        }
    }
}

pub fn fit_standardizer(
    dataset: &TabularDataset,
    columns: &[String],
    mode: FitScope,
) -> Result<StandardizerParams> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = dataset.n_rows() as f64;
    let mut mean = Vec::with_capacity(columns.len());
    let mut std_dev = Vec::with_capacity(columns.len());
    for name in columns {
        let c = dataset.require_column(name)?;
        let values = dataset.features().column(c);
        let m = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
        let constant = values.iter().all(|&v| v == values[0]);
        mean.push(m);
        std_dev.push(if constant { 0.0 } else { var.sqrt() });
    }
    Ok(StandardizerParams {
        columns: columns.to_vec(),
        mean,
        std_dev,
        fitted_on: mode,
    })
}

/// Rewrites the fitted columns in place.
pub fn apply_standardizer(
    dataset: &TabularDataset,
    params: &StandardizerParams,
) -> Result<TabularDataset> {
    let targets = resolve(dataset, params)?;
    let d = dataset.n_features();
    let mut data = dataset.features().as_slice().to_vec();
    for r in 0..dataset.n_rows() {
        for (k, &c) in targets.iter().enumerate() {
            data[r * d + c] = params.transform(k, data[r * d + c]);
        }
    }
    dataset.with_features(
        FeatureMatrix::new(data, dataset.n_rows(), d)?,
        dataset.feature_names().to_vec(),
    )
}

/// Appends `<column>_Scaled` copies after the existing columns, leaving the
/// originals untouched.
pub fn append_scaled_columns(
    dataset: &TabularDataset,
    params: &StandardizerParams,
) -> Result<TabularDataset> {
    let targets = resolve(dataset, params)?;
    let d = dataset.n_features();
    let d_out = d + targets.len();
    let mut data = Vec::with_capacity(dataset.n_rows() * d_out);
    for row in dataset.features().rows() {
        data.extend_from_slice(row);
        data.extend(targets.iter().enumerate().map(|(k, &c)| params.transform(k, row[c])));
    }
    let mut names = dataset.feature_names().to_vec();
    names.extend(params.columns.iter().map(|c| format!("{c}_Scaled")));
    dataset.with_features(FeatureMatrix::new(data, dataset.n_rows(), d_out)?, names)
}

fn resolve(dataset: &TabularDataset, params: &StandardizerParams) -> Result<Vec<usize>> {
    if params.mean.len() != params.columns.len() || params.std_dev.len() != params.columns.len() {
        return Err(Error::InvalidParameter(
            "standardizer columns, means and std devs differ in length".into(),
        ));
    }
    params
        .columns
        .iter()
        .map(|name| dataset.require_column(name))
        .collect()
}
