//! Scenario orchestration, leakage measurement and comparison.
//!
//! All three sampling placements run through [`run_scenario`]; they differ
//! only in where the sampler pipeline is applied relative to the split.

mod compare;
mod leakage;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{
    append_scaled_columns, apply_standardizer, engineer_time_features, fit_standardizer,
    stratified_split, FitScope, RowProvenance, SplitSpec, StandardizerParams, TabularDataset, TimeFeatureMode,
};
use crate::error::{Error, Result};
use crate::gbdt::{self, GbdtModel, GbdtParams};
use crate::metrics::{evaluate, MetricsReport};
use crate::sampling::{apply_pipeline, SamplerPipeline};

pub use compare::{compare_scenarios, ComparisonReport, ComparisonRow, MetricDeltas, ScenarioDelta};
pub use leakage::{count_near_duplicates, detect_leakage, detect_leakage_with_radius, LeakageReport, Verdict};

/// Columns scaled when a scenario does not list its own.
pub const DEFAULT_SCALE_COLUMNS: [&str; 2] = ["Time", "Amount"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    NoSampling,
    SamplingAfterSplit,
    SamplingBeforeSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PreprocessingMode {
    /// Standardizers are fitted on the train partition only.
    #[default]
    Guarded,
    /// Standardizers are fitted on the whole input before anything else.
    PaperFaithful,
}

fn default_threshold() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub placement: Placement,
    #[serde(default)]
    pub pipeline: Option<SamplerPipeline>,
    #[serde(default)]
    pub preprocessing: PreprocessingMode,
    /// `None` scales whichever of Time and Amount exist.
    #[serde(default)]
    pub scale_columns: Option<Vec<String>>,
    /// Replace Time and Amount by scaled copies plus hour-of-day features.
    #[serde(default)]
    pub time_features: Option<TimeFeatureMode>,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default)]
    pub model: GbdtParams,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub near_duplicate_radius: Option<f64>,
}

impl ScenarioSpec {
    pub fn new(name: impl Into<String>, placement: Placement, pipeline: Option<SamplerPipeline>) -> Self {
        Self {
            name: name.into(),
            placement,
            pipeline,
            preprocessing: PreprocessingMode::Guarded,
            scale_columns: None,
            time_features: None,
            split: SplitSpec::default(),
            model: GbdtParams::default(),
            threshold: default_threshold(),
            near_duplicate_radius: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(format!("scenario {:?}: {msg}", self.name)));
        if self.name.is_empty() {
            return Err(Error::InvalidParameter("scenario name is empty".into()));
        }
        if !self
            .name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return bad("name may only contain ASCII letters, digits, '-', '_' and '.'".into());
        }
        match (self.placement, &self.pipeline) {
            (Placement::NoSampling, Some(_)) => return bad("NoSampling takes no pipeline".into()),
            (Placement::SamplingAfterSplit | Placement::SamplingBeforeSplit, None) => {
                return bad(format!("{:?} requires a pipeline", self.placement))
            }
            _ => {}
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!("threshold must be in (0, 1), got {}", self.threshold));
        }
        if let Some(r) = self.near_duplicate_radius {
            if !(r >= 0.0 && r.is_finite()) {
                return bad(format!("near_duplicate_radius must be finite and >= 0, got {r}"));
            }
        }
        self.split.validate()?;
        self.model.validate()?;
        Ok(())
    }

    /// Seed recorded in result file names.
    pub fn seed(&self) -> u64 {
        self.split.seed
    }

    /// Copy with every seed (split, sampler steps, model) set to `seed`.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        out.split.seed = seed;
        out.model.seed = seed;
        out.pipeline = out.pipeline.map(|p| p.reseeded(seed));
        out
    }

    fn resolved(&self, data: &TabularDataset) -> Self {
        let mut out = self.clone();
        if out.scale_columns.is_none() {
            out.scale_columns = Some(
                DEFAULT_SCALE_COLUMNS
                    .iter()
                    .filter(|c| data.column_index(c).is_some())
                    .map(|c| c.to_string())
                    .collect(),
            );
        }
        out
    }
}

/// Seeds in effect for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedBlock {
    pub split_seed: u64,
    pub sampler_seeds: Vec<u64>,
    pub model_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    /// The spec with every default filled in.
    pub scenario: ScenarioSpec,
    pub seeds: SeedBlock,
    pub metrics: MetricsReport,
    pub leakage: LeakageReport,
    /// `[negatives, positives]` after all resampling.
    pub train_class_counts: [usize; 2],
    pub test_class_counts: [usize; 2],
    pub data_fingerprint: String,
    pub feature_names: Vec<String>,
    pub wall_time_secs: f64,
    pub test_labels: Vec<u8>,
    pub test_scores: Vec<f64>,
}

impl ScenarioResult {
    /// `<scenario-name>-<seed>.result.json`
    pub fn file_name(&self) -> String {
        format!("{}-{}.result.json", self.scenario.name, self.scenario.seed())
    }

    /// Metrics recomputed from the stored test labels and scores.
    pub fn recompute_metrics(&self) -> Result<MetricsReport> {
        evaluate(&self.test_labels, &self.test_scores, self.scenario.threshold)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A result together with the model that produced it.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub result: ScenarioResult,
    pub model: GbdtModel,
    pub test_provenance: Vec<RowProvenance>,
}

/// Order-independent SHA-256 over feature names and every (features, label) row.
pub fn data_fingerprint(data: &TabularDataset) -> String {
    let mut row_digests: Vec<[u8; 32]> = (0..data.n_rows())
        .into_par_iter()
        .map(|i| {
            let mut h = Sha256::new();
            for v in data.row(i) {
                h.update(v.to_bits().to_le_bytes());
            }
            h.update([data.labels()[i]]);
            h.finalize().into()
        })
        .collect();
    row_digests.sort_unstable();
    let mut h = Sha256::new();
    for name in data.feature_names() {
        h.update((name.len() as u64).to_le_bytes());
        h.update(name.as_bytes());
    }
    for d in &row_digests {
        h.update(d);
    }
    hex::encode(h.finalize())
}

pub fn run_scenario(data: &TabularDataset, spec: &ScenarioSpec) -> Result<ScenarioResult> {
    run_scenario_with_model(data, spec).map(|o| o.result)
}

struct Scaling<'a> {
    columns: &'a [String],
    time_features: Option<TimeFeatureMode>,
}

impl Scaling<'_> {
    fn fit(&self, data: &TabularDataset, scope: FitScope) -> Result<Option<StandardizerParams>> {
        if self.columns.is_empty() {
            return Ok(None);
        }
        fit_standardizer(data, self.columns, scope).map(Some)
    }

    fn apply(&self, data: &TabularDataset, params: Option<&StandardizerParams>) -> Result<TabularDataset> {
        match (self.time_features, params) {
            (Some(mode), Some(p)) => engineer_time_features(&append_scaled_columns(data, p)?, mode),
            (Some(mode), None) => engineer_time_features(data, mode),
            (None, Some(p)) => apply_standardizer(data, p),
            (None, None) => Ok(data.clone()),
        }
    }
}

/// Runs one scenario and also returns the trained model.
///
/// Order of operations:
/// 1. PaperFaithful: fit and apply the standardizer on the full input.
/// 2. SamplingBeforeSplit: apply the pipeline to the full input.
/// 3. Split.
/// 4. Guarded: fit the standardizer on the train partition, apply to both.
/// 5. SamplingAfterSplit: apply the pipeline to the train partition.
/// 6. Train, score the test partition, evaluate, measure leakage.
pub fn run_scenario_with_model(data: &TabularDataset, spec: &ScenarioSpec) -> Result<ScenarioOutcome> {
    let started = Instant::now();
    spec.validate()?;
    let spec = spec.resolved(data);
    let fingerprint = data_fingerprint(data);
    let scaling = Scaling {
        columns: spec.scale_columns.as_deref().unwrap_or_default(),
        time_features: spec.time_features,
    };
    let paper_faithful = spec.preprocessing == PreprocessingMode::PaperFaithful;

    let mut working = data.clone();
    let mut scaler_scope = FitScope::TrainOnly;
    if paper_faithful {
        let params = scaling.fit(&working, FitScope::FullDataset).map_err(|e| e.at_stage("preprocess"))?;
        if params.is_some() {
            scaler_scope = FitScope::FullDataset;
        }
        working = scaling.apply(&working, params.as_ref()).map_err(|e| e.at_stage("preprocess"))?;
    }

    let pipeline = spec.pipeline.as_ref();
    if let (Placement::SamplingBeforeSplit, Some(p)) = (spec.placement, pipeline) {
        working = apply_pipeline(&working, p).map_err(|e| e.at_stage("pre-split sampling"))?;
    }

    let (mut train, mut test) = stratified_split(&working, &spec.split).map_err(|e| e.at_stage("split"))?;
    drop(working);

    if !paper_faithful {
        let params = scaling.fit(&train, FitScope::TrainOnly).map_err(|e| e.at_stage("preprocess"))?;
        train = scaling.apply(&train, params.as_ref()).map_err(|e| e.at_stage("preprocess"))?;
        test = scaling.apply(&test, params.as_ref()).map_err(|e| e.at_stage("preprocess"))?;
    }

    if let (Placement::SamplingAfterSplit, Some(p)) = (spec.placement, pipeline) {
        train = apply_pipeline(&train, p).map_err(|e| e.at_stage("post-split sampling"))?;
    }

    let model = gbdt::train(&train, &spec.model).map_err(|e| e.at_stage("train"))?;
    let scores = model.predict_proba(test.features()).map_err(|e| e.at_stage("predict"))?;
    let metrics = evaluate(test.labels(), &scores, spec.threshold).map_err(|e| e.at_stage("evaluate"))?;
    let leakage = detect_leakage_with_radius(&train, &test, scaler_scope, spec.near_duplicate_radius);

    let seeds = SeedBlock {
        split_seed: spec.split.seed,
        sampler_seeds: pipeline.map(|p| p.steps().iter().map(|s| s.seed).collect()).unwrap_or_default(),
        model_seed: spec.model.seed,
    };
    let result = ScenarioResult {
        seeds,
        metrics,
        leakage,
        train_class_counts: train.class_counts(),
        test_class_counts: test.class_counts(),
        data_fingerprint: fingerprint,
        feature_names: train.feature_names().to_vec(),
        wall_time_secs: 0.0,
        test_labels: test.labels().to_vec(),
        test_scores: scores,
        scenario: spec,
    };
    let mut outcome = ScenarioOutcome { result, model, test_provenance: test.provenance().to_vec() };
    outcome.result.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(outcome)
}

/// Runs scenarios concurrently on a pool of `workers` threads (0 = rayon default).
/// Results keep the order of `specs`.
pub fn run_scenarios(data: &TabularDataset, specs: &[ScenarioSpec], workers: usize) -> Vec<Result<ScenarioResult>> {
    let run = || specs.par_iter().map(|s| run_scenario(data, s)).collect();
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic_imbalanced, FeatureMatrix};
    use crate::sampling::SamplerSpec;

    fn small_model() -> GbdtParams {
        GbdtParams { n_estimators: 10, max_depth: 3, ..GbdtParams::default() }
    }

    fn smote_pipeline() -> SamplerPipeline {
        SamplerPipeline::single(SamplerSpec::smote(1.0, 5, 7)).unwrap()
    }

    #[test]
    fn spec_validation() {
        let ok = ScenarioSpec::new("a", Placement::NoSampling, None);
        assert!(ok.validate().is_ok());
        assert!(ScenarioSpec::new("a", Placement::NoSampling, Some(smote_pipeline())).validate().is_err());
        assert!(ScenarioSpec::new("a", Placement::SamplingAfterSplit, None).validate().is_err());
        assert!(ScenarioSpec::new("a/b", Placement::NoSampling, None).validate().is_err());
        assert!(ScenarioSpec { threshold: 1.0, ..ok }.validate().is_err());
    }

    #[test]
    fn after_split_is_clean_and_before_split_leaks() {
        let data = generate_synthetic_imbalanced(3000, 0.03, 4, 1.2, 1).unwrap();
        let mut after = ScenarioSpec::new("after", Placement::SamplingAfterSplit, Some(smote_pipeline()));
        after.model = small_model();
        let before = ScenarioSpec { name: "before".into(), placement: Placement::SamplingBeforeSplit, ..after.clone() };
        let a = run_scenario(&data, &after).unwrap();
        let b = run_scenario(&data, &before).unwrap();
        assert_eq!(a.leakage.verdict, Verdict::Clean);
        assert_eq!(b.leakage.verdict, Verdict::Leaky);
        assert!(b.leakage.synthetic_rows_in_test > 0);
        assert_eq!(a.data_fingerprint, b.data_fingerprint);
        // test side is a fifth of the original data
        assert_eq!(a.test_class_counts, [582, 18]);
        assert_eq!(a.train_class_counts[0], a.train_class_counts[1]);
    }

    #[test]
    fn paper_faithful_scaling_is_flagged() {
        let data = generate_synthetic_imbalanced(600, 0.1, 3, 1.0, 2).unwrap();
        let mut spec = ScenarioSpec::new("pf", Placement::NoSampling, None);
        spec.model = small_model();
        spec.scale_columns = Some(vec!["V1".into()]);
        spec.preprocessing = PreprocessingMode::PaperFaithful;
        let r = run_scenario(&data, &spec).unwrap();
        assert!(r.leakage.scaler_fitted_on_full_data);
        assert_eq!(r.leakage.verdict, Verdict::Leaky);
        spec.preprocessing = PreprocessingMode::Guarded;
        assert_eq!(run_scenario(&data, &spec).unwrap().leakage.verdict, Verdict::Clean);
    }

    #[test]
    fn defaults_are_echoed_and_metrics_recompute() {
        let data = generate_synthetic_imbalanced(500, 0.1, 3, 1.0, 3).unwrap();
        let mut spec = ScenarioSpec::new("base", Placement::NoSampling, None);
        spec.model = small_model();
        let r = run_scenario(&data, &spec).unwrap();
        assert_eq!(r.scenario.scale_columns, Some(vec![]));
        assert_eq!(r.recompute_metrics().unwrap(), r.metrics);
        assert_eq!(r.file_name(), "base-42.result.json");
        let back = ScenarioResult::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn guarded_model_ignores_test_values() {
        let data = generate_synthetic_imbalanced(800, 0.1, 3, 1.0, 4).unwrap();
        let mut spec = ScenarioSpec::new("g", Placement::NoSampling, None);
        spec.model = small_model();
        spec.scale_columns = Some(vec!["V1".into(), "V2".into()]);
        let (_, test) = stratified_split(&data, &spec.split).unwrap();
        let test_ids: Vec<usize> = test.provenance().iter().filter_map(RowProvenance::source_index).collect();
        let mut rows: Vec<Vec<f64>> = data.features().rows().map(<[f64]>::to_vec).collect();
        for &i in &test_ids {
            rows[i].iter_mut().for_each(|v| *v = -*v * 3.0 + 1.0);
        }
        let perturbed =
            TabularDataset::from_original(FeatureMatrix::from_rows(&rows).unwrap(), data.feature_names().to_vec(), data.labels().to_vec())
                .unwrap();
        let m1 = run_scenario_with_model(&data, &spec).unwrap().model;
        let m2 = run_scenario_with_model(&perturbed, &spec).unwrap().model;
        assert_eq!(m1.to_json().unwrap(), m2.to_json().unwrap());
    }

    #[test]
    fn errors_name_the_stage() {
        let data = generate_synthetic_imbalanced(200, 0.02, 2, 1.0, 5).unwrap();
        let spec = ScenarioSpec::new("s", Placement::SamplingAfterSplit, Some(smote_pipeline()));
        let err = run_scenario(&data, &spec).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: "post-split sampling", .. }), "{err}");
        let mut spec = ScenarioSpec::new("t", Placement::NoSampling, None);
        spec.time_features = Some(TimeFeatureMode::Corrected);
        let err = run_scenario(&data, &spec).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: "preprocess", .. }), "{err}");
    }

    #[test]
    fn fingerprint_ignores_row_order() {
        let data = generate_synthetic_imbalanced(100, 0.1, 2, 1.0, 6).unwrap();
        let rev: Vec<usize> = (0..100).rev().collect();
        assert_eq!(data_fingerprint(&data), data_fingerprint(&data.select_rows(&rev)));
        let other = generate_synthetic_imbalanced(100, 0.1, 2, 1.0, 7).unwrap();
        assert_ne!(data_fingerprint(&data), data_fingerprint(&other));
    }

    #[test]
    fn with_seed_reseeds_everything() {
        let spec = ScenarioSpec::new("x", Placement::SamplingAfterSplit, Some(smote_pipeline())).with_seed(9);
        assert_eq!((spec.split.seed, spec.model.seed, spec.pipeline.unwrap().steps()[0].seed), (9, 9, 9));
    }

    #[test]
    fn parallel_runs_keep_order() {
        let data = generate_synthetic_imbalanced(400, 0.1, 2, 1.0, 8).unwrap();
        let specs: Vec<ScenarioSpec> = (0..3)
            .map(|i| {
                let mut s = ScenarioSpec::new(format!("s{i}"), Placement::NoSampling, None).with_seed(i);
                s.model = small_model();
                s
            })
            .collect();
        let results = run_scenarios(&data, &specs, 2);
        for (i, r) in results.into_iter().enumerate() {
            let r = r.unwrap();
            assert_eq!(r.scenario.name, format!("s{i}"));
            let mut solo = run_scenario(&data, &specs[i]).unwrap();
            solo.wall_time_secs = r.wall_time_secs;
            assert_eq!(solo, r);
        }
    }
}
