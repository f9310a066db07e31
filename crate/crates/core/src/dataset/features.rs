use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{FeatureMatrix, TabularDataset};

/// How hour values at or past 24 are treated before segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeFeatureMode {
    /// Hour is `floor(Time / 3600)` as-is; hours >= 24 fall through to Night.
    PaperFaithful,
    /// Hour is reduced modulo 24 first.
    Corrected,
}

/// One-hot columns emitted after dropping the alphabetically first segment
/// (Afternoon).
pub const DAY_SEGMENT_COLUMNS: [&str; 3] = [
    "Day_Segment_Evening",
    "Day_Segment_Morning",
    "Day_Segment_Night",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DaySegment {
    Morning,
    Afternoon,
    Evening,
    Night,
}

impl DaySegment {
    fn of_hour(hour: f64) -> Self {
        if (6.0..12.0).contains(&hour) {
            DaySegment::Morning
        } else if (12.0..18.0).contains(&hour) {
            DaySegment::Afternoon
        } else if (18.0..24.0).contains(&hour) {
            DaySegment::Evening
        } else {
            DaySegment::Night
        }
    }

    fn one_hot(self) -> [f64; 3] {
        match self {
            DaySegment::Afternoon => [0.0, 0.0, 0.0],
            DaySegment::Evening => [1.0, 0.0, 0.0],
            DaySegment::Morning => [0.0, 1.0, 0.0],
            DaySegment::Night => [0.0, 0.0, 1.0],
        }
    }
}

/// Adds `Hour` and the day-segment one-hots, then drops the raw `Time` and
/// `Amount` columns.
///
/// Callers that want scaled copies of Time and Amount should append them
/// (see [`super::append_scaled_columns`]) before calling this.
pub fn engineer_time_features(
    dataset: &TabularDataset,
    mode: TimeFeatureMode,
) -> Result<TabularDataset> {
    let time_col = dataset
        .column_index("Time")
        .ok_or_else(|| Error::ColumnMissing("Time".into()))?;
    let amount_col = dataset.column_index("Amount");
    let keep: Vec<usize> = (0..dataset.n_features())
        .filter(|&c| c != time_col && Some(c) != amount_col)
        .collect();

    let d_out = keep.len() + 4;
    let mut data = Vec::with_capacity(dataset.n_rows() * d_out);
    for row in dataset.features().rows() {
        let raw_hour = (row[time_col] / 3600.0).floor();
        let hour = match mode {
            TimeFeatureMode::PaperFaithful => raw_hour,
            TimeFeatureMode::Corrected => raw_hour.rem_euclid(24.0),
        };
        data.extend(keep.iter().map(|&c| row[c]));
        data.push(hour);
        data.extend(DaySegment::of_hour(hour).one_hot());
    }
    let mut names: Vec<String> = keep
        .iter()
        .map(|&c| dataset.feature_names()[c].clone())
        .collect();
    names.push("Hour".into());
    names.extend(DAY_SEGMENT_COLUMNS.iter().map(|s| s.to_string()));
    dataset.with_features(FeatureMatrix::new(data, dataset.n_rows(), d_out)?, names)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_times(times: &[f64]) -> TabularDataset {
        let rows: Vec<Vec<f64>> = times.iter().map(|&t| vec![t, 1.5, 9.0]).collect();
        TabularDataset::from_original(
            FeatureMatrix::from_rows(&rows).unwrap(),
            vec!["Time".into(), "V1".into(), "Amount".into()],
            vec![0; times.len()],
        )
        .unwrap()
    }

    fn segment_of(out: &TabularDataset, row: usize) -> &'static str {
        let r = out.row(row);
        let hot = &r[r.len() - 3..];
        match hot {
            [1.0, 0.0, 0.0] => "Evening",
            [0.0, 1.0, 0.0] => "Morning",
            [0.0, 0.0, 1.0] => "Night",
            [0.0, 0.0, 0.0] => "Afternoon",
            _ => panic!("bad one-hot {hot:?}"),
        }
    }

    #[test]
    fn hour_thirty() {
        let d = with_times(&[3600.0 * 30.0]);
        let faithful = engineer_time_features(&d, TimeFeatureMode::PaperFaithful).unwrap();
        assert_eq!(segment_of(&faithful, 0), "Night");
        assert_eq!(faithful.row(0)[1], 30.0);
        let corrected = engineer_time_features(&d, TimeFeatureMode::Corrected).unwrap();
        assert_eq!(segment_of(&corrected, 0), "Morning");
        assert_eq!(corrected.row(0)[1], 6.0);
    }

    #[test]
    fn segment_boundaries() {
        let d = with_times(&[0.0, 6.0 * 3600.0, 12.0 * 3600.0, 18.0 * 3600.0, 24.0 * 3600.0 - 1.0]);
        for mode in [TimeFeatureMode::PaperFaithful, TimeFeatureMode::Corrected] {
            let out = engineer_time_features(&d, mode).unwrap();
            let segs: Vec<_> = (0..5).map(|r| segment_of(&out, r)).collect();
            assert_eq!(segs, ["Night", "Morning", "Afternoon", "Evening", "Evening"]);
        }
    }

    #[test]
    fn column_layout() {
        let out = engineer_time_features(&with_times(&[100.0]), TimeFeatureMode::Corrected).unwrap();
        assert_eq!(
            out.feature_names(),
            &["V1", "Hour", "Day_Segment_Evening", "Day_Segment_Morning", "Day_Segment_Night"]
        );
        assert_eq!(out.row(0)[0], 1.5);
    }

    #[test]
    fn pure_and_requires_time() {
        let d = with_times(&[5000.0, 90_000.0]);
        let a = engineer_time_features(&d, TimeFeatureMode::PaperFaithful).unwrap();
        let b = engineer_time_features(&d, TimeFeatureMode::PaperFaithful).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.provenance(), d.provenance());

        let no_time = TabularDataset::from_original(
            FeatureMatrix::from_rows(&[vec![1.0]]).unwrap(),
            vec!["V1".into()],
            vec![1],
        )
        .unwrap();
        assert!(matches!(
            engineer_time_features(&no_time, TimeFeatureMode::Corrected),
            Err(Error::ColumnMissing(_))
        ));
    }
}
