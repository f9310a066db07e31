//! Command-line driver: generate data, summarize it, run scenarios and
//! compare their results.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use leakguard::dataset::{
    amount_summary_by_class, class_distribution, correlation_matrix, generate_synthetic_imbalanced, load_csv,
    write_csv, CsvSchema,
};
use leakguard::experiment::{compare_scenarios, run_scenarios, Placement, ScenarioResult};
use leakguard::metrics::roc_curve;

use config::{ExperimentConfig, SchemaKind};
use output::OutputDir;

#[derive(Debug, Parser)]
#[command(name = "leakguard", version, about = "Leakage-guarded resampling experiments for imbalanced classification")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Replace every seed (data generator, split, samplers, model).
    #[arg(long, global = true)]
    pub seed_override: Option<u64>,
    /// Directory for output files.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    /// Allow scenarios that resample before the train/test split.
    #[arg(long, global = true)]
    pub allow_presplit_sampling: bool,
    /// Scenarios run concurrently (0 = one per CPU).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic imbalanced dataset as CSV.
    Generate(GenerateArgs),
    /// Class distribution, per-class amount summary and correlation matrix.
    Stats(StatsArgs),
    /// Run every scenario of an experiment config.
    Run {
        /// Experiment config (JSON).
        config: PathBuf,
    },
    /// Tabulate scenario results side by side with inflation deltas.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 20_000)]
    pub rows: usize,
    #[arg(long, default_value_t = 0.01)]
    pub positive_fraction: f64,
    #[arg(long, default_value_t = 10)]
    pub features: usize,
    #[arg(long, default_value_t = 1.2)]
    pub separation: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output file; relative paths land in --out-dir.
    #[arg(long, short, default_value = "synthetic.csv")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Input CSV.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "any")]
    pub schema: SchemaKind,
    #[arg(long, default_value = "Class")]
    pub label_column: String,
    /// Column summarized per class; skipped when absent.
    #[arg(long, default_value = "Amount")]
    pub amount_column: String,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Result files written by `run`.
    #[arg(required = true, num_args = 1..)]
    pub results: Vec<PathBuf>,
    /// Base name of the comparison outputs.
    #[arg(long, default_value = "comparison")]
    pub name: String,
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => cmd_generate(&cli.global, args),
        Command::Stats(args) => cmd_stats(&cli.global, args),
        Command::Run { config } => cmd_run(&cli.global, config),
        Command::Compare(args) => cmd_compare(&cli.global, args),
    }
}

fn out_dir(global: &GlobalArgs) -> OutputDir {
    OutputDir::new(global.out_dir.clone().unwrap_or_else(|| PathBuf::from(".")), global.force)
}

pub fn cmd_generate(global: &GlobalArgs, args: &GenerateArgs) -> Result<()> {
    let seed = global.seed_override.unwrap_or(args.seed);
    let data = generate_synthetic_imbalanced(args.rows, args.positive_fraction, args.features, args.separation, seed)
        .context("generate")?;
    let mut buf = Vec::new();
    write_csv(&data, &mut buf).context("generate: writing CSV")?;
    let out = out_dir(global);
    let path = out.write(&args.output.to_string_lossy(), &buf)?;
    let [neg, pos] = data.class_counts();
    println!("wrote {} ({} rows: {neg} negative, {pos} positive, seed {seed})", path.display(), data.n_rows());
    Ok(())
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
}

pub fn cmd_stats(global: &GlobalArgs, args: &StatsArgs) -> Result<()> {
    let schema = match args.schema {
        SchemaKind::Creditcard => CsvSchema::creditcard(),
        SchemaKind::Any => CsvSchema::any(args.label_column.clone()),
    };
    let data = load_csv(&args.input, &schema).with_context(|| format!("stats: loading {}", args.input.display()))?;
    let dist = class_distribution(&data).context("stats: class distribution")?;
    let corr = correlation_matrix(&data).context("stats: correlation")?;
    let amount = match data.column_index(&args.amount_column) {
        Some(_) => Some(amount_summary_by_class(&data, &args.amount_column).context("stats: amount summary")?),
        None => None,
    };

    let out = out_dir(global);
    let mut names = vec!["class_distribution.json", "class_distribution.csv", "correlation.json", "correlation.csv"];
    if amount.is_some() {
        names.extend(["amount_summary.json", "amount_summary.csv"]);
    }
    out.check_free(names.iter().copied())?;

    out.write("class_distribution.json", serde_json::to_string_pretty(&dist)?.as_bytes())?;
    let header = ["class", "count", "fraction"].map(String::from);
    let total = data.n_rows() as f64;
    let rows: Vec<Vec<String>> = [(0, dist.negative), (1, dist.positive)]
        .iter()
        .map(|(c, n)| vec![c.to_string(), n.to_string(), (*n as f64 / total).to_string()])
        .collect();
    out.write("class_distribution.csv", &csv_bytes(&header, &rows)?)?;

    out.write("correlation.json", serde_json::to_string_pretty(&corr)?.as_bytes())?;
    let mut header = vec![String::new()];
    header.extend(corr.names.iter().cloned());
    let rows: Vec<Vec<String>> = corr
        .names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mut r = vec![name.clone()];
            r.extend((0..corr.names.len()).map(|j| corr.get(i, j).to_string()));
            r
        })
        .collect();
    out.write("correlation.csv", &csv_bytes(&header, &rows)?)?;

    if let Some(summary) = &amount {
        let json = serde_json::json!({
            "column": args.amount_column,
            "negative": summary[0],
            "positive": summary[1],
        });
        out.write("amount_summary.json", serde_json::to_string_pretty(&json)?.as_bytes())?;
        let header = ["class", "count", "min", "q1", "median", "q3", "max"].map(String::from);
        let rows: Vec<Vec<String>> = summary
            .iter()
            .enumerate()
            .filter_map(|(c, s)| {
                s.map(|s| {
                    vec![c.to_string(), s.count.to_string()]
                        .into_iter()
                        .chain([s.min, s.q1, s.median, s.q3, s.max].iter().map(f64::to_string))
                        .collect()
                })
            })
            .collect();
        out.write("amount_summary.csv", &csv_bytes(&header, &rows)?)?;
    }

    println!(
        "{} rows: {} negative, {} positive (minority fraction {:.5})",
        data.n_rows(),
        dist.negative,
        dist.positive,
        dist.minority_fraction
    );
    if !corr.constant_columns.is_empty() {
        println!("constant columns (correlation set to 0): {}", corr.constant_columns.join(", "));
    }
    if amount.is_none() {
        println!("no {:?} column; amount summary skipped", args.amount_column);
    }
    Ok(())
}

pub fn cmd_run(global: &GlobalArgs, config_path: &Path) -> Result<()> {
    let mut config = ExperimentConfig::load(config_path)?;
    if let Some(seed) = global.seed_override {
        config = config.with_seed(seed);
    }
    if config.has_presplit_sampling() && !global.allow_presplit_sampling {
        let names: Vec<&str> = config
            .scenarios
            .iter()
            .filter(|s| s.placement == Placement::SamplingBeforeSplit)
            .map(|s| s.name.as_str())
            .collect();
        bail!(
            "refusing to run pre-split sampling scenario(s) {}: resampling before the split leaks test rows \
             into training; pass --allow-presplit-sampling to reproduce that protocol on purpose",
            names.join(", ")
        );
    }

    let base_dir = config_path.parent().unwrap_or(Path::new(""));
    let dir = global.out_dir.clone().unwrap_or_else(|| base_dir.join(&config.output_dir));
    let out = OutputDir::new(dir, global.force);
    let file_names: Vec<String> = config
        .scenarios
        .iter()
        .map(|s| format!("{}-{}.result.json", s.name, s.seed()))
        .collect();
    out.check_free(file_names.iter().map(String::as_str))?;

    let data = config.data.load(base_dir).context("load data")?;
    let results = run_scenarios(&data, &config.scenarios, global.workers);

    let mut failures = Vec::new();
    for (spec, result) in config.scenarios.iter().zip(results) {
        match result {
            Ok(r) => {
                let path = out.write(&r.file_name(), r.to_json()?.as_bytes())?;
                println!(
                    "{:<24} {:<7?} recall {:.4}  F1 {:.4}  AUC {:.4}  -> {}",
                    r.scenario.name,
                    r.leakage.verdict,
                    r.metrics.recall,
                    r.metrics.f1,
                    r.metrics.auc,
                    path.display()
                );
            }
            Err(e) => failures.push(format!("scenario {:?}: {e}", spec.name)),
        }
    }
    if !failures.is_empty() {
        bail!("{}", failures.join("\n"));
    }
    Ok(())
}

fn load_result(path: &Path) -> Result<ScenarioResult> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        anyhow::anyhow!("malformed result {} at key `{key}`: {}", path.display(), e.into_inner())
    })
}

pub fn cmd_compare(global: &GlobalArgs, args: &CompareArgs) -> Result<()> {
    let results: Vec<ScenarioResult> = args.results.iter().map(|p| load_result(p)).collect::<Result<_>>()?;
    let report = compare_scenarios(&results).context("compare")?;

    let out = out_dir(global);
    let json_name = format!("{}.json", args.name);
    let txt_name = format!("{}.txt", args.name);
    let roc_names: Vec<String> = results
        .iter()
        .map(|r| format!("roc-{}-{}.csv", r.scenario.name, r.scenario.seed()))
        .collect();
    out.check_free([json_name.as_str(), txt_name.as_str()].into_iter().chain(roc_names.iter().map(String::as_str)))?;

    let table = report.render_table();
    out.write(&json_name, serde_json::to_string_pretty(&report)?.as_bytes())?;
    out.write(&txt_name, table.as_bytes())?;
    for (r, name) in results.iter().zip(&roc_names) {
        let curve = roc_curve(&r.test_labels, &r.test_scores).with_context(|| format!("ROC curve for {name}"))?;
        let rows: Vec<Vec<String>> = curve
            .iter()
            .map(|p| vec![p.threshold.to_string(), p.fpr.to_string(), p.tpr.to_string()])
            .collect();
        out.write(name, &csv_bytes(&["threshold", "fpr", "tpr"].map(String::from), &rows)?)?;
    }
    print!("{table}");
    Ok(())
}
