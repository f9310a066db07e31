use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::{FeatureMatrix, TabularDataset};

/// Expected layout of a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    /// Required feature columns in output order; `None` accepts any header.
    pub feature_columns: Option<Vec<String>>,
    pub label_column: String,
}

impl CsvSchema {
    /// Time, V1..V28, Amount with the Class label.
    pub fn creditcard() -> Self {
        let mut cols = vec!["Time".to_string()];
        cols.extend((1..=28).map(|i| format!("V{i}")));
        cols.push("Amount".to_string());
        Self {
            feature_columns: Some(cols),
            label_column: "Class".to_string(),
        }
    }

    /// Every non-label column is a feature, in header order.
    pub fn any(label_column: impl Into<String>) -> Self {
        Self {
            feature_columns: None,
            label_column: label_column.into(),
        }
    }
}

/// Loads a headed CSV file. Columns are resolved by header name, so any
/// column order is accepted. Row numbers in errors are 1-based data rows.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<TabularDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let label_idx = header
        .iter()
        .position(|h| *h == schema.label_column)
        .ok_or_else(|| {
            Error::HeaderMismatch(format!("label column {:?} not in header", schema.label_column))
        })?;

    let feature_names: Vec<String> = match &schema.feature_columns {
        Some(expected) => {
            for h in &header {
                if *h != schema.label_column && !expected.contains(h) {
                    return Err(Error::HeaderMismatch(format!("unexpected column {h:?}")));
                }
            }
            for e in expected {
                if !header.contains(e) {
                    return Err(Error::HeaderMismatch(format!("missing column {e:?}")));
                }
            }
            expected.clone()
        }
        None => header
            .iter()
            .filter(|h| **h != schema.label_column)
            .cloned()
            .collect(),
    };
    let mut seen = std::collections::HashSet::new();
    for h in &header {
        if !seen.insert(h) {
            return Err(Error::HeaderMismatch(format!("duplicate column {h:?}")));
        }
    }
    let source_cols: Vec<usize> = feature_names
        .iter()
        .map(|n| header.iter().position(|h| h == n).expect("checked above"))
        .collect();

    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() != header.len() {
            return Err(Error::InvalidDataset(format!(
                "row {row} has {} fields, header has {}",
                record.len(),
                header.len()
            )));
        }
        for &c in &source_cols {
            let cell = &record[c];
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => data.push(v),
                _ => {
                    return Err(Error::Parse {
                        row,
                        column: header[c].clone(),
                        value: cell.to_string(),
                    })
                }
            }
        }
        let raw = &record[label_idx];
        let label = match raw.parse::<f64>() {
            Ok(0.0) => 0,
            Ok(1.0) => 1,
            _ => {
                return Err(Error::InvalidLabel {
                    row,
                    value: raw.to_string(),
                })
            }
        };
        labels.push(label);
    }
    let n_cols = feature_names.len();
    let features = FeatureMatrix::new(data, labels.len(), n_cols)?;
    TabularDataset::from_original(features, feature_names, labels)
}

/// Writes features followed by a `Class` column. Values use the shortest
/// representation that parses back to the same bits.
pub fn write_csv<W: Write>(dataset: &TabularDataset, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = dataset.feature_names().iter().map(String::as_str).collect();
    header.push("Class");
    writer.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for (row, &label) in dataset.features().rows().zip(dataset.labels()) {
        record.clear();
        record.extend(row.iter().map(|v| v.to_string()));
        record.push(label.to_string());
        writer.write_record(&record)?;
    }
    writer.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
