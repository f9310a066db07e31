use crate::dataset::{FeatureMatrix, TabularDataset, POSITIVE};
use crate::error::{Error, Result};

use super::binning::{BinnedMatrix, MISSING_BIN};
use super::split::{best_split, leaf_weight, SplitCandidate};
use super::{sigmoid, GbdtModel, GbdtParams, TreeNode};

/// Weighted mean training log-loss; `loss[0]` is the prior-only model and
/// `loss[t]` the model after `t` trees.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingHistory {
    pub loss: Vec<f64>,
}

pub fn train(data: &TabularDataset, params: &GbdtParams) -> Result<GbdtModel> {
    train_with_history(data, params).map(|(m, _)| m)
}

pub fn train_with_history(
    data: &TabularDataset,
    params: &GbdtParams,
) -> Result<(GbdtModel, TrainingHistory)> {
    params.validate()?;
    check_training_data(data)?;

    let labels = data.labels();
    let weights: Vec<f64> = labels
        .iter()
        .map(|&y| if y == POSITIVE { params.positive_class_weight } else { 1.0 })
        .collect();
    let total_w: f64 = weights.iter().sum();
    let pos_w: f64 = weights.iter().zip(labels).filter(|(_, &y)| y == POSITIVE).map(|(w, _)| w).sum();
    let prior = pos_w / total_w;
    let base_score = (prior / (1.0 - prior)).ln();

    let binned = BinnedMatrix::build(data.features(), params.n_bins);
    let n = data.n_rows();
    let mut margins = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut row_leaf = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.n_estimators);
    let mut loss = Vec::with_capacity(params.n_estimators + 1);
    loss.push(weighted_log_loss(&margins, labels, &weights, total_w));

    let all_rows: Vec<u32> = (0..n as u32).collect();
    for _ in 0..params.n_estimators {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            let y = f64::from(labels[i]);
            grad[i] = weights[i] * (p - y);
            hess[i] = weights[i] * p * (1.0 - p);
        }
        let grower = Grower {
            binned: &binned,
            grad: &grad,
            hess: &hess,
            params,
        };
        let tree = grower.grow(all_rows.clone(), 0, &mut row_leaf);
        for (m, w) in margins.iter_mut().zip(&row_leaf) {
            *m += params.learning_rate * w;
        }
        trees.push(tree);
        loss.push(weighted_log_loss(&margins, labels, &weights, total_w));
    }

    let model = GbdtModel::new(params.clone(), base_score, data.n_features(), trees);
    Ok((model, TrainingHistory { loss }))
}

fn check_training_data(data: &TabularDataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.n_features() == 0 {
        return Err(Error::InvalidDataset("no feature columns".into()));
    }
    match data.class_counts() {
        [0, _] => return Err(Error::SingleClass(1)),
        [_, 0] => return Err(Error::SingleClass(0)),
        _ => {}
    }
    if let Some(pos) = data.features().as_slice().iter().position(|v| v.is_infinite()) {
        let d = data.n_features();
        return Err(Error::InvalidDataset(format!(
            "row {}, column {:?} is infinite; only NaN marks a missing value",
            pos / d,
            data.feature_names()[pos % d]
        )));
    }
    Ok(())
}

fn weighted_log_loss(margins: &[f64], labels: &[u8], weights: &[f64], total_w: f64) -> f64 {
    let sum: f64 = margins
        .iter()
        .zip(labels)
        .zip(weights)
        .map(|((&m, &y), &w)| {
            // log(1 + e^m) − y·m, written to avoid overflow
            let softplus = m.max(0.0) + (-m.abs()).exp().ln_1p();
            w * (softplus - f64::from(y) * m)
        })
        .sum();
    sum / total_w
}

struct Grower<'a> {
    binned: &'a BinnedMatrix,
    grad: &'a [f64],
    hess: &'a [f64],
    params: &'a GbdtParams,
}

impl Grower<'_> {
    fn grow(&self, rows: Vec<u32>, depth: usize, row_leaf: &mut [f64]) -> TreeNode {
        if depth < self.params.max_depth && rows.len() >= 2 {
            if let Some(split) = best_split(self.binned, &rows, self.grad, self.hess, self.params) {
                let (left_rows, right_rows) = self.partition(&rows, &split);
                if !left_rows.is_empty() && !right_rows.is_empty() {
                    drop(rows);
                    let left = self.grow(left_rows, depth + 1, row_leaf);
                    let right = self.grow(right_rows, depth + 1, row_leaf);
                    return TreeNode::Internal {
                        feature_index: split.feature,
                        threshold: split.threshold,
                        missing_goes_left: split.missing_goes_left,
                        gain: split.gain,
                        left: Box::new(left),
                        right: Box::new(right),
                    };
                }
            }
        }
        let (g, h) = rows.iter().fold((0.0, 0.0), |(g, h), &r| {
            (g + self.grad[r as usize], h + self.hess[r as usize])
        });
        let weight = leaf_weight(g, h, self.params.lambda_l2, self.params.alpha_l1);
        for &r in &rows {
            row_leaf[r as usize] = weight;
        }
        TreeNode::Leaf { weight }
    }

    fn partition(&self, rows: &[u32], split: &SplitCandidate) -> (Vec<u32>, Vec<u32>) {
        let bins = &self.binned.columns[split.feature];
        let cut = split.cut_index as u16;
        rows.iter().partition(|&&r| {
            let b = bins[r as usize];
            if b == MISSING_BIN {
                split.missing_goes_left
            } else {
                b <= cut
            }
        })
    }
}

/// Best root split of `features` for caller-supplied gradients and hessians.
pub fn best_root_split(
    features: &FeatureMatrix,
    grad: &[f64],
    hess: &[f64],
    params: &GbdtParams,
) -> Result<Option<SplitCandidate>> {
    params.validate()?;
    if grad.len() != features.n_rows() || hess.len() != features.n_rows() {
        return Err(Error::InvalidParameter(format!(
            "{} rows, {} gradients, {} hessians",
            features.n_rows(),
            grad.len(),
            hess.len()
        )));
    }
    let binned = BinnedMatrix::build(features, params.n_bins);
    let rows: Vec<u32> = (0..features.n_rows() as u32).collect();
    Ok(best_split(&binned, &rows, grad, hess, params))
}
