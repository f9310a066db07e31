//! Gradient-boosted decision trees for binary classification.
//!
//! Training minimizes the (optionally class-weighted) logistic loss with
//! Newton steps: every round computes per-row gradients and hessians of the
//! loss at the current margin, grows one depth-limited tree on histogram
//! bins, and sets each leaf to the closed-form minimizer `−S(G)/(H + λ)` of
//! the second-order objective, where `S` is the L1 soft-threshold. Leaves are
//! stored unscaled; prediction multiplies them by the learning rate.
//!
//! Missing values are `NaN`. During split search they are tried on both sides
//! and the better direction is stored in the node.

mod binning;
mod split;
mod train;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

pub use binning::bin_cuts;
pub use split::{leaf_weight, soft_threshold, split_gain, SplitCandidate};
pub use train::{best_root_split, train, train_with_history, TrainingHistory};

pub const MODEL_FORMAT: &str = "leakguard-gbdt";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Upper bound on tree depth; keeps nested JSON within parser limits.
pub const MAX_DEPTH_LIMIT: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbdtParams {
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub max_depth: usize,
    pub lambda_l2: f64,
    pub alpha_l1: f64,
    pub positive_class_weight: f64,
    pub n_bins: usize,
    pub min_child_weight: f64,
    /// Reserved for tie-breaking; training draws no random numbers.
    pub seed: u64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.3,
            n_estimators: 100,
            max_depth: 6,
            lambda_l2: 1.0,
            alpha_l1: 0.0,
            positive_class_weight: 1.0,
            n_bins: 256,
            min_child_weight: 1.0,
            seed: 0,
        }
    }
}

impl GbdtParams {
    /// learning rate 0.4, 1000 rounds, 256 histogram bins, seed 42.
    pub fn fraud_baseline() -> Self {
        Self {
            learning_rate: 0.4,
            n_estimators: 1000,
            seed: 42,
            ..Self::default()
        }
    }

    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        if self.max_depth == 0 || self.max_depth > MAX_DEPTH_LIMIT {
            return bad(format!("max_depth must be in 1..={MAX_DEPTH_LIMIT}, got {}", self.max_depth));
        }
        if !(self.lambda_l2 >= 0.0) || self.lambda_l2.is_infinite() {
            return bad(format!("lambda_l2 must be finite and >= 0, got {}", self.lambda_l2));
        }
        if !(self.alpha_l1 >= 0.0) || self.alpha_l1.is_infinite() {
            return bad(format!("alpha_l1 must be finite and >= 0, got {}", self.alpha_l1));
        }
        if !(self.positive_class_weight > 0.0 && self.positive_class_weight.is_finite()) {
            return bad(format!(
                "positive_class_weight must be > 0, got {}",
                self.positive_class_weight
            ));
        }
        if self.n_bins < 2 || self.n_bins > binning::MAX_BINS {
            return bad(format!("n_bins must be in 2..={}, got {}", binning::MAX_BINS, self.n_bins));
        }
        if !(self.min_child_weight >= 0.0) || self.min_child_weight.is_infinite() {
            return bad(format!("min_child_weight must be finite and >= 0, got {}", self.min_child_weight));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Internal {
        feature_index: usize,
        threshold: f64,
        missing_goes_left: bool,
        gain: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        weight: f64,
    },
}

impl TreeNode {
    fn goes_left(x: f64, threshold: f64, missing_goes_left: bool) -> bool {
        if x.is_nan() {
            missing_goes_left
        } else {
            x < threshold
        }
    }

    /// Unscaled weight of the leaf `row` lands in.
    pub fn leaf_weight_for(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Internal { feature_index, threshold, missing_goes_left, left, right, .. } => {
                    node = if Self::goes_left(row[*feature_index], *threshold, *missing_goes_left) {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// Position of the leaf `row` lands in, counting leaves left to right.
    pub fn leaf_index_for(&self, row: &[f64]) -> usize {
        let mut node = self;
        let mut offset = 0;
        loop {
            match node {
                TreeNode::Leaf { .. } => return offset,
                TreeNode::Internal { feature_index, threshold, missing_goes_left, left, right, .. } => {
                    if Self::goes_left(row[*feature_index], *threshold, *missing_goes_left) {
                        node = left;
                    } else {
                        offset += left.n_leaves();
                        node = right;
                    }
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    /// Leaf weights left to right.
    pub fn leaves(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.visit(&mut |n| {
            if let TreeNode::Leaf { weight } = n {
                out.push(*weight);
            }
        });
        out
    }

    /// Gains of all internal nodes, pre-order.
    pub fn split_gains(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.visit(&mut |n| {
            if let TreeNode::Internal { gain, .. } = n {
                out.push(*gain);
            }
        });
        out
    }

    /// Leaves count as depth 0.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn visit(&self, f: &mut impl FnMut(&TreeNode)) {
        f(self);
        if let TreeNode::Internal { left, right, .. } = self {
            left.visit(f);
            right.visit(f);
        }
    }

    fn max_feature_index(&self) -> Option<usize> {
        let mut max = None;
        self.visit(&mut |n| {
            if let TreeNode::Internal { feature_index, .. } = n {
                max = max.max(Some(*feature_index));
            }
        });
        max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub format: String,
    pub version: u32,
    pub params: GbdtParams,
    /// Initial log-odds margin.
    pub base_score: f64,
    pub feature_count: usize,
    pub trees: Vec<TreeNode>,
}

impl GbdtModel {
    pub(crate) fn new(params: GbdtParams, base_score: f64, feature_count: usize, trees: Vec<TreeNode>) -> Self {
        Self {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_FORMAT_VERSION,
            params,
            base_score,
            feature_count,
            trees,
        }
    }

    /// Copy keeping only the first `n_trees` trees.
    pub fn prefix(&self, n_trees: usize) -> Self {
        let mut out = self.clone();
        out.trees.truncate(n_trees);
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != MODEL_FORMAT || self.version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported model format {:?} version {}",
                self.format, self.version
            )));
        }
        self.params.validate()?;
        if !self.base_score.is_finite() {
            return Err(Error::InvalidParameter("base_score is not finite".into()));
        }
        for (i, t) in self.trees.iter().enumerate() {
            if let Some(f) = t.max_feature_index() {
                if f >= self.feature_count {
                    return Err(Error::InvalidParameter(format!(
                        "tree {i} uses feature {f}, model has {}",
                        self.feature_count
                    )));
                }
            }
        }
        Ok(())
    }

    fn margin_of(&self, row: &[f64]) -> f64 {
        let lr = self.params.learning_rate;
        self.trees
            .iter()
            .fold(self.base_score, |m, t| m + lr * t.leaf_weight_for(row))
    }

    fn check_width(&self, rows: &FeatureMatrix) -> Result<()> {
        if rows.n_cols() != self.feature_count {
            return Err(Error::FeatureCountMismatch {
                expected: self.feature_count,
                actual: rows.n_cols(),
            });
        }
        Ok(())
    }

    pub fn predict_margin(&self, rows: &FeatureMatrix) -> Result<Vec<f64>> {
        self.check_width(rows)?;
        Ok((0..rows.n_rows())
            .into_par_iter()
            .map(|i| self.margin_of(rows.row(i)))
            .collect())
    }

    pub fn predict_proba(&self, rows: &FeatureMatrix) -> Result<Vec<f64>> {
        Ok(self.predict_margin(rows)?.into_iter().map(sigmoid).collect())
    }

    /// Class 1 where `proba >= threshold`.
    pub fn predict(&self, rows: &FeatureMatrix, threshold: f64) -> Result<Vec<u8>> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold must be in (0, 1), got {threshold}"
            )));
        }
        Ok(self
            .predict_proba(rows)?
            .into_iter()
            .map(|p| u8::from(p >= threshold))
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

pub fn sigmoid(m: f64) -> f64 {
    if m >= 0.0 {
        1.0 / (1.0 + (-m).exp())
    } else {
        let e = m.exp();
        e / (1.0 + e)
    }
}
