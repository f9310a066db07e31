use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::{round_half_up, seeded_rng};

use super::TabularDataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    #[serde(default = "default_stratified")]
    pub stratified: bool,
}

fn default_stratified() -> bool {
    true
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            seed: 42,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.test_fraction > 0.0 && self.test_fraction < 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "test_fraction must be in (0, 1), got {}",
                self.test_fraction
            )))
        }
    }
}

/// Splits into `(train, test)`.
///
/// Stratified: each class is shuffled with the seeded generator and its first
/// `round(count · test_fraction)` rows go to the test side. Both partitions
/// keep the input row order.
pub fn stratified_split(
    dataset: &TabularDataset,
    spec: &SplitSpec,
) -> Result<(TabularDataset, TabularDataset)> {
    spec.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = seeded_rng(spec.seed);
    let mut test_rows = Vec::new();
    if spec.stratified {
        for class in [0u8, 1] {
            let mut idx = dataset.class_indices(class);
            let count = idx.len();
            let n_test = round_half_up(count as f64 * spec.test_fraction);
            if count == 0 || n_test == 0 || n_test == count {
                return Err(Error::TooFewRows {
                    class,
                    available: count,
                    required: min_rows_for(spec.test_fraction),
                    context: format!(
                        "stratified split with test_fraction {} needs the class on both sides",
                        spec.test_fraction
                    ),
                });
            }
            idx.shuffle(&mut rng);
            test_rows.extend_from_slice(&idx[..n_test]);
        }
    } else {
        let mut idx: Vec<usize> = (0..dataset.n_rows()).collect();
        let n_test = round_half_up(idx.len() as f64 * spec.test_fraction);
        if n_test == 0 || n_test == idx.len() {
            return Err(Error::InvalidParameter(format!(
                "test_fraction {} on {} rows leaves a partition empty",
                spec.test_fraction,
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        test_rows.extend_from_slice(&idx[..n_test]);
    }

    let mut in_test = vec![false; dataset.n_rows()];
    for &i in &test_rows {
        in_test[i] = true;
    }
    let (test_idx, train_idx): (Vec<usize>, Vec<usize>) =
        (0..dataset.n_rows()).partition(|&i| in_test[i]);
    Ok((dataset.select_rows(&train_idx), dataset.select_rows(&test_idx)))
}

/// Smallest class size that puts at least one row on each side.
fn min_rows_for(test_fraction: f64) -> usize {
    (2..)
        .find(|&n| {
            let t = round_half_up(n as f64 * test_fraction);
            t > 0 && t < n
        })
        .unwrap_or(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureMatrix, RowProvenance};

    fn labelled(neg: usize, pos: usize) -> TabularDataset {
        let n = neg + pos;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        let labels = (0..n).map(|i| u8::from(i >= neg)).collect();
        TabularDataset::from_original(FeatureMatrix::from_rows(&rows).unwrap(), vec!["x".into()], labels)
            .unwrap()
    }

    #[test]
    fn per_class_counts() {
        let ds = labelled(990, 10);
        let (train, test) = stratified_split(&ds, &SplitSpec { test_fraction: 0.2, seed: 3, stratified: true }).unwrap();
        assert_eq!(test.class_counts(), [198, 2]);
        assert_eq!(train.class_counts(), [792, 8]);
    }

    #[test]
    fn one_row_per_class_is_rejected() {
        let ds = labelled(1, 1);
        let err = stratified_split(&ds, &SplitSpec { test_fraction: 0.5, seed: 0, stratified: true }).unwrap_err();
        assert!(matches!(err, Error::TooFewRows { .. }), "{err}");
    }

    #[test]
    fn rejects_bad_fraction() {
        let ds = labelled(10, 10);
        for f in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(stratified_split(&ds, &SplitSpec { test_fraction: f, seed: 0, stratified: true }).is_err());
        }
    }

    #[test]
    fn unstratified_split_sizes() {
        let ds = labelled(90, 10);
        let (train, test) = stratified_split(&ds, &SplitSpec { test_fraction: 0.25, seed: 1, stratified: false }).unwrap();
        assert_eq!(test.n_rows(), 25);
        assert_eq!(train.n_rows(), 75);
    }

    #[test]
    fn partition_is_disjoint_and_ordered() {
        let ds = labelled(80, 20);
        let (train, test) = stratified_split(&ds, &SplitSpec::default()).unwrap();
        let src = |d: &TabularDataset| -> Vec<usize> {
            d.provenance().iter().map(|p| match p {
                RowProvenance::Original(i) => *i,
                _ => unreachable!(),
            }).collect()
        };
        let (a, b) = (src(&train), src(&test));
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        let mut all: Vec<usize> = a.into_iter().chain(b).collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn minimum_rows_hint() {
        assert_eq!(min_rows_for(0.5), 2);
        assert_eq!(min_rows_for(0.2), 3);
        assert_eq!(min_rows_for(0.1), 5);
    }
}
