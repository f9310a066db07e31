//! Class rebalancing for training partitions.
//!
//! `sampling_strategy` is the minority/majority count ratio a step aims for.
//! Over-samplers grow the minority class to `round(strategy · majority)`
//! rows; the under-sampler shrinks the majority class to
//! `round(minority / strategy)` rows. Inputs are never modified: surviving
//! rows keep their provenance and every created row is tagged
//! [`RowProvenance::Duplicate`] or [`RowProvenance::Synthetic`].

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureMatrix, RowProvenance, TabularDataset};
use crate::error::{Error, Result};
use crate::util::{round_half_up, seeded_rng};

/// Relative slack when comparing a requested ratio with the current one.
const RATIO_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplerKind {
    RandomOver,
    RandomUnder,
    Smote,
    GaussianSynth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    pub sampling_strategy: f64,
    #[serde(default = "default_k")]
    pub k_neighbors: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_k() -> usize {
    5
}

impl SamplerSpec {
    pub fn new(kind: SamplerKind, sampling_strategy: f64, seed: u64) -> Self {
        Self {
            kind,
            sampling_strategy,
            k_neighbors: default_k(),
            seed,
        }
    }

    pub fn smote(sampling_strategy: f64, k_neighbors: usize, seed: u64) -> Self {
        Self {
            kind: SamplerKind::Smote,
            sampling_strategy,
            k_neighbors,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sampling_strategy > 0.0 && self.sampling_strategy <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sampling_strategy must be in (0, 1], got {}",
                self.sampling_strategy
            )));
        }
        if self.kind == SamplerKind::Smote && self.k_neighbors == 0 {
            return Err(Error::InvalidParameter("k_neighbors must be >= 1".into()));
        }
        Ok(())
    }

    fn expect_kind(&self, kind: SamplerKind) -> Result<()> {
        self.validate()?;
        if self.kind != kind {
            return Err(Error::InvalidParameter(format!(
                "spec of kind {:?} passed to the {kind:?} sampler",
                self.kind
            )));
        }
        Ok(())
    }
}

/// Ordered, non-empty list of sampler steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PipelineRepr", into = "PipelineRepr")]
pub struct SamplerPipeline {
    steps: Vec<SamplerSpec>,
}

#[derive(Serialize, Deserialize)]
struct PipelineRepr {
    steps: Vec<SamplerSpec>,
}

impl TryFrom<PipelineRepr> for SamplerPipeline {
    type Error = Error;

    fn try_from(r: PipelineRepr) -> Result<Self> {
        Self::new(r.steps)
    }
}

impl From<SamplerPipeline> for PipelineRepr {
    fn from(p: SamplerPipeline) -> Self {
        PipelineRepr { steps: p.steps }
    }
}

impl SamplerPipeline {
    pub fn new(steps: Vec<SamplerSpec>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidParameter("sampler pipeline has no steps".into()));
        }
        for (index, s) in steps.iter().enumerate() {
            s.validate().map_err(|e| Error::PipelineStep {
                index,
                source: Box::new(e),
            })?;
        }
        Ok(Self { steps })
    }

    pub fn single(step: SamplerSpec) -> Result<Self> {
        Self::new(vec![step])
    }

    pub fn steps(&self) -> &[SamplerSpec] {
        &self.steps
    }

    /// Copy of the pipeline with every step seeded by `seed`.
    pub fn reseeded(&self, seed: u64) -> Self {
        let mut out = self.clone();
        for s in &mut out.steps {
            s.seed = seed;
        }
        out
    }
}

/// Minority label and class sizes of a two-class dataset. On a tie the
/// positive class counts as the minority.
#[derive(Debug, Clone, Copy)]
struct ClassRoles {
    minority: u8,
    n_min: usize,
    n_maj: usize,
}

impl ClassRoles {
    fn of(ds: &TabularDataset) -> Result<Self> {
        let [neg, pos] = ds.class_counts();
        if neg == 0 {
            return Err(Error::SingleClass(1));
        }
        if pos == 0 {
            return Err(Error::SingleClass(0));
        }
        Ok(if pos <= neg {
            Self { minority: 1, n_min: pos, n_maj: neg }
        } else {
            Self { minority: 0, n_min: neg, n_maj: pos }
        })
    }

    fn majority(&self) -> u8 {
        1 - self.minority
    }

    fn ratio(&self) -> f64 {
        self.n_min as f64 / self.n_maj as f64
    }

    fn check_reachable(&self, strategy: f64) -> Result<()> {
        let current = self.ratio();
        if strategy < current * (1.0 - RATIO_EPS) {
            return Err(Error::InvalidParameter(format!(
                "sampling_strategy {strategy} is below the current minority/majority ratio {current:.6}"
            )));
        }
        Ok(())
    }

    /// Minority rows to add so that minority/majority reaches `strategy`.
    fn oversample_count(&self, strategy: f64) -> Result<usize> {
        self.check_reachable(strategy)?;
        let target = round_half_up(strategy * self.n_maj as f64).max(self.n_min);
        Ok(target - self.n_min)
    }
}

/// Generates new minority rows from the existing ones.
///
/// Implementations receive the minority rows only and must return exactly
/// `count · n_features` values, row-major.
pub trait Synthesizer {
    /// Non-empty tag stored in [`RowProvenance::Synthetic`].
    fn method_name(&self) -> &str;

    fn generate(&self, minority: &FeatureMatrix, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>>;
}

/// Grows the minority class to `strategy · majority` rows with `synthesizer`,
/// appending the new rows after the input rows.
pub fn oversample_with(
    train: &TabularDataset,
    sampling_strategy: f64,
    seed: u64,
    synthesizer: &dyn Synthesizer,
) -> Result<TabularDataset> {
    let roles = ClassRoles::of(train)?;
    let count = roles.oversample_count(sampling_strategy)?;
    if count == 0 {
        return Ok(train.clone());
    }
    let minority = train.select_rows(&train.class_indices(roles.minority));
    let mut rng = seeded_rng(seed);
    let rows = synthesizer.generate(minority.features(), count, &mut rng)?;
    if rows.len() != count * train.n_features() {
        return Err(Error::InvalidDataset(format!(
            "synthesizer {:?} returned {} values for {count} rows",
            synthesizer.method_name(),
            rows.len()
        )));
    }
    let tag = RowProvenance::Synthetic(synthesizer.method_name().to_string());
    Ok(train.with_appended(rows, vec![roles.minority; count], vec![tag; count]))
}

/// Random over-sampling: minority rows drawn uniformly with replacement.
pub fn random_oversample(train: &TabularDataset, spec: &SamplerSpec) -> Result<TabularDataset> {
    spec.expect_kind(SamplerKind::RandomOver)?;
    let roles = ClassRoles::of(train)?;
    let count = roles.oversample_count(spec.sampling_strategy)?;
    if count == 0 {
        return Ok(train.clone());
    }
    let minority_idx = train.class_indices(roles.minority);
    let mut rng = seeded_rng(spec.seed);
    let mut rows = Vec::with_capacity(count * train.n_features());
    let mut provenance = Vec::with_capacity(count);
    for _ in 0..count {
        let src = minority_idx[rng.random_range(0..minority_idx.len())];
        rows.extend_from_slice(train.row(src));
        provenance.push(match &train.provenance()[src] {
            RowProvenance::Original(i) | RowProvenance::Duplicate(i) => RowProvenance::Duplicate(*i),
            synthetic => synthetic.clone(),
        });
    }
    Ok(train.with_appended(rows, vec![roles.minority; count], provenance))
}

/// Random under-sampling: majority rows kept uniformly without replacement,
/// in input order.
pub fn random_undersample(train: &TabularDataset, spec: &SamplerSpec) -> Result<TabularDataset> {
    spec.expect_kind(SamplerKind::RandomUnder)?;
    let roles = ClassRoles::of(train)?;
    roles.check_reachable(spec.sampling_strategy)?;
    let keep = round_half_up(roles.n_min as f64 / spec.sampling_strategy).min(roles.n_maj);
    if keep == roles.n_maj {
        return Ok(train.clone());
    }
    let majority_idx = train.class_indices(roles.majority());
    let mut rng = seeded_rng(spec.seed);
    let mut kept = vec![false; train.n_rows()];
    for i in index::sample(&mut rng, majority_idx.len(), keep) {
        kept[majority_idx[i]] = true;
    }
    let rows: Vec<usize> = (0..train.n_rows())
        .filter(|&i| kept[i] || train.labels()[i] == roles.minority)
        .collect();
    Ok(train.select_rows(&rows))
}

/// SMOTE interpolation between a minority row and one of its k nearest
/// minority neighbours.
#[derive(Debug, Clone, Copy)]
pub struct SmoteSynthesizer {
    pub k_neighbors: usize,
}

impl Synthesizer for SmoteSynthesizer {
    fn method_name(&self) -> &str {
        "smote"
    }

    fn generate(&self, minority: &FeatureMatrix, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let k = self.k_neighbors;
        let n = minority.n_rows();
        if k == 0 || n <= k {
            return Err(Error::TooFewRows {
                class: 1,
                available: n,
                required: k + 1,
                context: format!("SMOTE with k_neighbors = {k}"),
            });
        }
        let neighbors = nearest_neighbors(minority, k);
        let mut out = Vec::with_capacity(count * minority.n_cols());
        for _ in 0..count {
            let a = rng.random_range(0..n);
            let b = neighbors[a][rng.random_range(0..k)];
            let u: f64 = rng.random();
            let (ra, rb) = (minority.row(a), minority.row(b));
            out.extend(ra.iter().zip(rb).map(|(x, y)| x + u * (y - x)));
        }
        Ok(out)
    }
}

/// For every row, the `k` nearest other rows by Euclidean distance; ties go
/// to the lower row index.
pub fn nearest_neighbors(points: &FeatureMatrix, k: usize) -> Vec<Vec<usize>> {
    (0..points.n_rows())
        .into_par_iter()
        .map(|i| {
            let a = points.row(i);
            let mut dist: Vec<(f64, usize)> = (0..points.n_rows())
                .filter(|&j| j != i)
                .map(|j| {
                    let d2 = a.iter().zip(points.row(j)).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
                    (d2, j)
                })
                .collect();
            let k = k.min(dist.len());
            let by_dist = |x: &(f64, usize), y: &(f64, usize)| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1));
            if k < dist.len() {
                dist.select_nth_unstable_by(k, by_dist);
                dist.truncate(k);
            }
            dist.sort_by(by_dist);
            dist.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

pub fn smote(train: &TabularDataset, spec: &SamplerSpec) -> Result<TabularDataset> {
    spec.expect_kind(SamplerKind::Smote)?;
    let roles = ClassRoles::of(train)?;
    if roles.n_min <= spec.k_neighbors {
        return Err(Error::TooFewRows {
            class: roles.minority,
            available: roles.n_min,
            required: spec.k_neighbors + 1,
            context: format!("SMOTE with k_neighbors = {}", spec.k_neighbors),
        });
    }
    oversample_with(
        train,
        spec.sampling_strategy,
        spec.seed,
        &SmoteSynthesizer {
            k_neighbors: spec.k_neighbors,
        },
    )
}

/// Per-feature mean and population variance of a set of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl GaussianFit {
    pub fn fit(rows: &FeatureMatrix) -> Result<Self> {
        if rows.n_rows() < 2 {
            return Err(Error::TooFewRows {
                class: 1,
                available: rows.n_rows(),
                required: 2,
                context: "Gaussian synthesizer fit".into(),
            });
        }
        let n = rows.n_rows() as f64;
        let (mean, variance) = (0..rows.n_cols())
            .map(|c| {
                let col = rows.column(c);
                let m = col.iter().sum::<f64>() / n;
                let v = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
                (m, v)
            })
            .unzip();
        Ok(Self { mean, variance })
    }
}

/// Diagonal-covariance Gaussian fitted to the minority rows.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianSynthesizer;

impl Synthesizer for GaussianSynthesizer {
    fn method_name(&self) -> &str {
        "gaussian"
    }

    fn generate(&self, minority: &FeatureMatrix, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let fit = GaussianFit::fit(minority)?;
        let sd: Vec<f64> = fit.variance.iter().map(|v| v.sqrt()).collect();
        let mut out = Vec::with_capacity(count * minority.n_cols());
        for _ in 0..count {
            for (m, s) in fit.mean.iter().zip(&sd) {
                let z: f64 = rng.sample(StandardNormal);
                out.push(m + s * z);
            }
        }
        Ok(out)
    }
}

pub fn gaussian_synthesize(train: &TabularDataset, spec: &SamplerSpec) -> Result<TabularDataset> {
    spec.expect_kind(SamplerKind::GaussianSynth)?;
    let roles = ClassRoles::of(train)?;
    if roles.n_min < 2 {
        return Err(Error::TooFewRows {
            class: roles.minority,
            available: roles.n_min,
            required: 2,
            context: "Gaussian synthesizer fit".into(),
        });
    }
    oversample_with(train, spec.sampling_strategy, spec.seed, &GaussianSynthesizer)
}

/// Runs the sampler named by `spec.kind`.
pub fn apply_sampler(train: &TabularDataset, spec: &SamplerSpec) -> Result<TabularDataset> {
    match spec.kind {
        SamplerKind::RandomOver => random_oversample(train, spec),
        SamplerKind::RandomUnder => random_undersample(train, spec),
        SamplerKind::Smote => smote(train, spec),
        SamplerKind::GaussianSynth => gaussian_synthesize(train, spec),
    }
}

/// Applies the steps left to right. Errors carry the failing step index.
pub fn apply_pipeline(train: &TabularDataset, pipeline: &SamplerPipeline) -> Result<TabularDataset> {
    let mut current = train.clone();
    for (index, step) in pipeline.steps().iter().enumerate() {
        current = apply_sampler(&current, step).map_err(|e| Error::PipelineStep {
            index,
            source: Box::new(e),
        })?;
    }
    Ok(current)
}
