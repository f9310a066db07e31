use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricsReport;

use super::{Placement, ScenarioResult, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricDeltas {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
    pub auc: f64,
}

impl MetricDeltas {
    fn between(a: &MetricsReport, b: &MetricsReport) -> Self {
        Self {
            accuracy: a.accuracy - b.accuracy,
            precision: a.precision - b.precision,
            recall: a.recall - b.recall,
            f1: a.f1 - b.f1,
            mcc: a.mcc - b.mcc,
            auc: a.auc - b.auc,
        }
    }
}

/// `deltas = metrics(subject) − metrics(reference)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDelta {
    pub subject: String,
    pub reference: String,
    pub deltas: MetricDeltas,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scenario: String,
    pub placement: Placement,
    pub verdict: Verdict,
    pub seed: u64,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub data_fingerprint: String,
    pub rows: Vec<ComparisonRow>,
    /// Pre-split results against post-split results; every result against
    /// the first when either placement is absent.
    pub deltas: Vec<ScenarioDelta>,
    /// Leaky scenarios whose F1 exceeds that of every Clean scenario.
    pub leaky_outperformers: Vec<String>,
    pub averaging: String,
}

/// Tabulates results side by side and computes inflation deltas.
///
/// Each pre-split result is paired with the post-split results that use the
/// same sampler steps, or with all post-split results if none match.
pub fn compare_scenarios(results: &[ScenarioResult]) -> Result<ComparisonReport> {
    if results.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "comparison needs at least 2 results, got {}",
            results.len()
        )));
    }
    let fingerprint = &results[0].data_fingerprint;
    if let Some(other) = results.iter().find(|r| &r.data_fingerprint != fingerprint) {
        return Err(Error::FingerprintMismatch(fingerprint.clone(), other.data_fingerprint.clone()));
    }

    let label = |r: &ScenarioResult| format!("{}-{}", r.scenario.name, r.scenario.seed());
    let by = |p: Placement| results.iter().filter(move |r| r.scenario.placement == p);
    let mut deltas = Vec::new();
    let afters: Vec<&ScenarioResult> = by(Placement::SamplingAfterSplit).collect();
    let befores: Vec<&ScenarioResult> = by(Placement::SamplingBeforeSplit).collect();
    if !afters.is_empty() && !befores.is_empty() {
        for b in &befores {
            let same_steps = |a: &&&ScenarioResult| {
                let steps = |r: &ScenarioResult| {
                    r.scenario.pipeline.as_ref().map(|p| {
                        p.steps().iter().map(|s| (s.kind, s.sampling_strategy.to_bits(), s.k_neighbors)).collect::<Vec<_>>()
                    })
                };
                steps(a) == steps(b)
            };
            let matched: Vec<&&ScenarioResult> = afters.iter().filter(same_steps).collect();
            let refs: Vec<&&ScenarioResult> = if matched.is_empty() { afters.iter().collect() } else { matched };
            for a in refs {
                deltas.push(ScenarioDelta {
                    subject: label(b),
                    reference: label(a),
                    deltas: MetricDeltas::between(&b.metrics, &a.metrics),
                });
            }
        }
    } else {
        let first = &results[0];
        for r in &results[1..] {
            deltas.push(ScenarioDelta {
                subject: label(r),
                reference: label(first),
                deltas: MetricDeltas::between(&r.metrics, &first.metrics),
            });
        }
    }

    let best_clean_f1 = results
        .iter()
        .filter(|r| r.leakage.verdict == Verdict::Clean)
        .map(|r| r.metrics.f1)
        .fold(None, |m: Option<f64>, f| Some(m.map_or(f, |m| m.max(f))));
    let leaky_outperformers = match best_clean_f1 {
        Some(best) => results
            .iter()
            .filter(|r| r.leakage.verdict == Verdict::Leaky && r.metrics.f1 > best)
            .map(label)
            .collect(),
        None => Vec::new(),
    };

    Ok(ComparisonReport {
        data_fingerprint: fingerprint.clone(),
        rows: results
            .iter()
            .map(|r| ComparisonRow {
                scenario: label(r),
                placement: r.scenario.placement,
                verdict: r.leakage.verdict,
                seed: r.scenario.seed(),
                metrics: r.metrics.clone(),
            })
            .collect(),
        deltas,
        leaky_outperformers,
        averaging: results[0].metrics.averaging.clone(),
    })
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

fn signed_points(x: f64) -> String {
    format!("{:+.2}", 100.0 * x)
}

impl ComparisonReport {
    /// Plain-text table, one row per scenario, metrics in percent.
    pub fn render_table(&self) -> String {
        let head = ["Scenario", "Placement", "Verdict", "Accuracy", "Precision", "Recall", "F1", "MCC", "AUC"];
        let mut rows: Vec<Vec<String>> = vec![head.iter().map(|s| s.to_string()).collect()];
        for r in &self.rows {
            let m = &r.metrics;
            rows.push(vec![
                r.scenario.clone(),
                format!("{:?}", r.placement),
                format!("{:?}", r.verdict),
                pct(m.accuracy),
                pct(m.precision),
                pct(m.recall),
                pct(m.f1),
                format!("{:.4}", m.mcc),
                format!("{:.4}", m.auc),
            ]);
        }
        let mut out = String::new();
        write_aligned(&mut out, &rows, 3);

        if !self.deltas.is_empty() {
            out.push_str("\nInflation (subject - reference, percentage points)\n");
            let mut rows: Vec<Vec<String>> = vec![["Subject", "Reference", "Accuracy", "Precision", "Recall", "F1", "MCC", "AUC"]
                .iter()
                .map(|s| s.to_string())
                .collect()];
            for d in &self.deltas {
                let x = &d.deltas;
                rows.push(vec![
                    d.subject.clone(),
                    d.reference.clone(),
                    signed_points(x.accuracy),
                    signed_points(x.precision),
                    signed_points(x.recall),
                    signed_points(x.f1),
                    signed_points(x.mcc),
                    signed_points(x.auc),
                ]);
            }
            write_aligned(&mut out, &rows, 2);
        }
        for name in &self.leaky_outperformers {
            let _ = writeln!(out, "WARNING: leaky scenario {name} outperforms every clean scenario on F1");
        }
        let _ = writeln!(out, "Scores: {}", self.averaging);
        out
    }
}

/// Left-aligns the first `text_cols` columns, right-aligns the rest.
fn write_aligned(out: &mut String, rows: &[Vec<String>], text_cols: usize) {
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, &w))| if c < text_cols { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
        if i == 0 {
            let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            let _ = writeln!(out, "{}", "-".repeat(total));
        }
    }
}
