use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use leakguard::dataset::{generate_synthetic_imbalanced, load_csv, CsvSchema, TabularDataset};
use leakguard::experiment::{Placement, ScenarioSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SchemaKind {
    /// Time, V1..V28, Amount, Class.
    Creditcard,
    /// Every column except the label is a feature.
    #[default]
    Any,
}

fn default_label() -> String {
    "Class".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSource {
    Csv {
        /// Relative paths are resolved against the config file's directory.
        path: PathBuf,
        #[serde(default)]
        schema: SchemaKind,
        #[serde(default = "default_label")]
        label_column: String,
    },
    Synthetic {
        n_rows: usize,
        positive_fraction: f64,
        n_features: usize,
        class_separation: f64,
        seed: u64,
    },
}

impl DataSource {
    pub fn load(&self, base_dir: &Path) -> Result<TabularDataset> {
        match self {
            DataSource::Csv { path, schema, label_column } => {
                let path = base_dir.join(path);
                let schema = match schema {
                    SchemaKind::Creditcard => CsvSchema::creditcard(),
                    SchemaKind::Any => CsvSchema::any(label_column.clone()),
                };
                load_csv(&path, &schema).with_context(|| format!("loading {}", path.display()))
            }
            DataSource::Synthetic { n_rows, positive_fraction, n_features, class_separation, seed } => {
                generate_synthetic_imbalanced(*n_rows, *positive_fraction, *n_features, *class_separation, *seed)
                    .context("generating synthetic data")
            }
        }
    }

    fn reseeded(&self, new_seed: u64) -> Self {
        match self {
            DataSource::Synthetic { n_rows, positive_fraction, n_features, class_separation, .. } => DataSource::Synthetic {
                n_rows: *n_rows,
                positive_fraction: *positive_fraction,
                n_features: *n_features,
                class_separation: *class_separation,
                seed: new_seed,
            },
            other => other.clone(),
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

/// One file that fully determines an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub scenarios: Vec<ScenarioSpec>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Parses JSON, naming the offending key and line on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let inner = e.into_inner();
            anyhow::anyhow!("at key `{key}`: {inner}")
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("malformed config {}", path.display()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            bail!("config lists no scenarios");
        }
        let mut seen = HashSet::new();
        for s in &self.scenarios {
            if !seen.insert(s.name.as_str()) {
                bail!("scenario name {:?} is used twice", s.name);
            }
            s.validate()?;
        }
        Ok(())
    }

    pub fn has_presplit_sampling(&self) -> bool {
        self.scenarios.iter().any(|s| s.placement == Placement::SamplingBeforeSplit)
    }

    /// Copy with every data and scenario seed replaced.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            data: self.data.reseeded(seed),
            scenarios: self.scenarios.iter().map(|s| s.with_seed(seed)).collect(),
            output_dir: self.output_dir.clone(),
        }
    }
}
