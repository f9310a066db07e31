use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::util::{round_half_up, seeded_rng};

use super::{FeatureMatrix, TabularDataset};

/// Draws a two-class Gaussian dataset.
///
/// Negatives come from N(0, I); positives from N(s·1, I) where `s` is
/// `class_separation`. Exactly `round(n_rows · positive_fraction)` rows are
/// positive and the two classes are interleaved in a seeded random order.
/// Feature columns are named `V1..Vn`.
pub fn generate_synthetic_imbalanced(
    n_rows: usize,
    positive_fraction: f64,
    n_features: usize,
    class_separation: f64,
    seed: u64,
) -> Result<TabularDataset> {
    if n_rows < 2 {
        return Err(Error::InvalidParameter(format!("n_rows must be >= 2, got {n_rows}")));
    }
    if !(positive_fraction > 0.0 && positive_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "positive_fraction must be in (0, 1), got {positive_fraction}"
        )));
    }
    if n_features == 0 {
        return Err(Error::InvalidParameter("n_features must be >= 1".into()));
    }
    if !(class_separation >= 0.0 && class_separation.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "class_separation must be finite and >= 0, got {class_separation}"
        )));
    }
    let n_pos = round_half_up(n_rows as f64 * positive_fraction);
    if n_pos == 0 || n_pos >= n_rows {
        return Err(Error::InvalidParameter(format!(
            "positive_fraction {positive_fraction} on {n_rows} rows leaves a class empty"
        )));
    }

    let mut rng = seeded_rng(seed);
    let mut labels = vec![0u8; n_rows];
    labels[..n_pos].fill(1);
    labels.shuffle(&mut rng);

    let mut data = Vec::with_capacity(n_rows * n_features);
    for &label in &labels {
        let shift = if label == 1 { class_separation } else { 0.0 };
        for _ in 0..n_features {
            let z: f64 = rng.sample(StandardNormal);
            data.push(z + shift);
        }
    }
    let names = (1..=n_features).map(|i| format!("V{i}")).collect();
    TabularDataset::from_original(FeatureMatrix::new(data, n_rows, n_features)?, names, labels)
}
