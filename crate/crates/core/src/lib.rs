//! Leakage-guarded toolkit for imbalanced binary classification.
//!
//! The crate bundles everything needed to measure how resampling placement
//! affects evaluation on rare-event data:
//!
//! * [`dataset`]: CSV ingestion, a seeded synthetic generator, stratified
//!   splitting, standardization, time-of-day features and summary statistics.
//!   Every row carries a [`dataset::RowProvenance`] tag.
//! * [`sampling`]: random over/under-sampling, SMOTE, a diagonal Gaussian
//!   synthesizer and ordered sampler pipelines.
//! * [`gbdt`]: Newton-boosted histogram trees with L1/L2 regularization,
//!   positive-class weighting and learned missing-value directions.
//! * [`metrics`]: confusion-matrix scores and rank-based ROC-AUC.
//! * [`experiment`]: the three sampling placements, leakage detection and
//!   scenario comparison.

pub mod dataset;
pub mod error;
pub mod experiment;
pub mod gbdt;
pub mod metrics;
pub mod sampling;

mod util;

pub use error::{Error, Result};
