//! Confusion-matrix scores and ROC analysis for binary classifiers.
//!
//! Class 1 is the positive class throughout. Scores with an empty denominator
//! evaluate to 0 instead of NaN; [`MetricsReport::degenerate`] lists every
//! such case so a 0 can be told apart from a measured 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Averaging convention used for precision, recall and F1 in reports.
pub const AVERAGING_NOTE: &str = "positive-class (label 1) scores; not macro-averaged";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    pub fn mcc(&self) -> f64 {
        let (tp, fp, tn, fn_) = (self.tp as f64, self.fp as f64, self.tn as f64, self.fn_ as f64);
        let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
        if factors.contains(&0.0) {
            return 0.0;
        }
        let denom = (factors[0] * factors[1]).sqrt() * (factors[2] * factors[3]).sqrt();
        (tp * tn - fp * fn_) / denom
    }

    /// Names of the scores that fell back to the zero-denominator convention.
    pub fn degenerate_scores(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.tp + self.fp == 0 {
            out.push("precision");
        }
        if self.tp + self.fn_ == 0 {
            out.push("recall");
        }
        if self.precision() + self.recall() == 0.0 {
            out.push("f1");
        }
        if self.tp + self.fp == 0 || self.tp + self.fn_ == 0 || self.tn + self.fp == 0 || self.tn + self.fn_ == 0 {
            out.push("mcc");
        }
        out
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn check_labels(labels: &[u8]) -> Result<()> {
    match labels.iter().position(|&l| l > 1) {
        Some(row) => Err(Error::InvalidLabel {
            row,
            value: labels[row].to_string(),
        }),
        None => Ok(()),
    }
}

pub fn confusion(labels: &[u8], predictions: &[u8]) -> Result<ConfusionMatrix> {
    if labels.len() != predictions.len() {
        return Err(Error::InvalidParameter(format!(
            "{} labels vs {} predictions",
            labels.len(),
            predictions.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_labels(labels)?;
    check_labels(predictions)?;
    let mut cm = ConfusionMatrix::default();
    for (&y, &p) in labels.iter().zip(predictions) {
        match (y, p) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (0, 0) => cm.tn += 1,
            _ => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

pub fn precision(cm: &ConfusionMatrix) -> f64 {
    cm.precision()
}

pub fn recall(cm: &ConfusionMatrix) -> f64 {
    cm.recall()
}

pub fn f1(cm: &ConfusionMatrix) -> f64 {
    cm.f1()
}

pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    cm.accuracy()
}

pub fn mcc(cm: &ConfusionMatrix) -> f64 {
    cm.mcc()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores `>= threshold` are called positive at this point.
    pub threshold: f64,
}

fn check_scored(labels: &[u8], scores: &[f64]) -> Result<(usize, usize)> {
    if labels.len() != scores.len() {
        return Err(Error::InvalidParameter(format!(
            "{} labels vs {} scores",
            labels.len(),
            scores.len()
        )));
    }
    check_labels(labels)?;
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::InvalidParameter(format!("score {i} is NaN")));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 {
        return Err(Error::SingleClass(0));
    }
    if neg == 0 {
        return Err(Error::SingleClass(1));
    }
    Ok((pos, neg))
}

/// ROC points from the strictest threshold down: starts at (0, 0), adds one
/// point per distinct score and ends at (1, 1).
pub fn roc_curve(labels: &[u8], scores: &[f64]) -> Result<Vec<RocPoint>> {
    let (pos, neg) = check_scored(labels, scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold: s,
        });
    }
    Ok(points)
}

/// Rank-based (Mann-Whitney) AUC; tied scores share their average rank.
pub fn auc(labels: &[u8], scores: &[f64]) -> Result<f64> {
    let (pos, neg) = check_scored(labels, scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j averaged
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        let tied_pos = order[i..j].iter().filter(|&&k| labels[k] == 1).count();
        pos_rank_sum += avg_rank * tied_pos as f64;
        i = j;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
    pub auc: f64,
    pub threshold: f64,
    pub confusion: ConfusionMatrix,
    pub positive_count: usize,
    pub negative_count: usize,
    /// Scores reported as 0 because their denominator was empty.
    #[serde(default)]
    pub degenerate: Vec<String>,
    pub averaging: String,
}

/// Thresholds `scores` (`>= threshold` is positive) and computes every score.
pub fn evaluate(labels: &[u8], scores: &[f64], threshold: f64) -> Result<MetricsReport> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold must be in (0, 1), got {threshold}"
        )));
    }
    let auc = auc(labels, scores)?;
    let predictions: Vec<u8> = scores.iter().map(|&s| u8::from(s >= threshold)).collect();
    let cm = confusion(labels, &predictions)?;
    Ok(MetricsReport {
        accuracy: cm.accuracy(),
        precision: cm.precision(),
        recall: cm.recall(),
        f1: cm.f1(),
        mcc: cm.mcc(),
        auc,
        threshold,
        confusion: cm,
        positive_count: (cm.tp + cm.fn_) as usize,
        negative_count: (cm.tn + cm.fp) as usize,
        degenerate: cm.degenerate_scores().into_iter().map(String::from).collect(),
        averaging: AVERAGING_NOTE.to_string(),
    })
}
