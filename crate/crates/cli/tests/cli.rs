use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use leakguard::experiment::{ScenarioResult, Verdict};
use leakguard_cli::config::ExperimentConfig;

fn leakguard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leakguard")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL_CONFIG: &str = r#"{
  "data": {"kind": "synthetic", "n_rows": 1500, "positive_fraction": 0.04,
           "n_features": 4, "class_separation": 1.2, "seed": 3},
  "scenarios": [
    {"name": "base", "placement": "NoSampling", "model": {"n_estimators": 8, "max_depth": 3}},
    {"name": "after", "placement": "SamplingAfterSplit",
     "pipeline": {"steps": [{"kind": "Smote", "sampling_strategy": 1.0, "seed": 7}]},
     "model": {"n_estimators": 8, "max_depth": 3}},
    {"name": "before", "placement": "SamplingBeforeSplit",
     "pipeline": {"steps": [{"kind": "Smote", "sampling_strategy": 1.0, "seed": 7}]},
     "model": {"n_estimators": 8, "max_depth": 3}}
  ]
}"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("experiment.json");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn generate_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path());
    let args = ["--rows", "300", "--positive-fraction", "0.1", "--features", "3", "--seed", "5"];
    for name in ["a.csv", "b.csv"] {
        let mut a = vec!["--out-dir", out, "generate", "--output", name];
        a.extend(args);
        assert!(leakguard(&a).status.success());
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    assert!(String::from_utf8_lossy(&a).starts_with("V1,V2,V3,Class\n"));

    let mut again = vec!["--out-dir", out, "generate", "--output", "a.csv"];
    again.extend(args);
    let refused = leakguard(&again);
    assert!(!refused.status.success());
    assert!(stderr(&refused).contains("--force"));

    let mut other = vec!["--out-dir", out, "--seed-override", "6", "--force", "generate", "--output", "a.csv"];
    other.extend(args);
    assert!(leakguard(&other).status.success());
    assert_ne!(a, fs::read(dir.path().join("a.csv")).unwrap());
}

#[test]
fn run_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CONFIG);
    let results = dir.path().join("results");

    let refused = leakguard(&["run", path_str(&config)]);
    assert!(!refused.status.success());
    assert!(stderr(&refused).contains("--allow-presplit-sampling"), "{}", stderr(&refused));
    assert!(!results.exists());

    let ok = leakguard(&["--allow-presplit-sampling", "--workers", "2", "run", path_str(&config)]);
    assert!(ok.status.success(), "{}", stderr(&ok));
    let files: Vec<PathBuf> = ["base", "after", "before"]
        .iter()
        .map(|n| results.join(format!("{n}-42.result.json")))
        .collect();
    for f in &files {
        let r = ScenarioResult::from_json(&fs::read_to_string(f).unwrap()).unwrap();
        assert_eq!(r.recompute_metrics().unwrap(), r.metrics);
        let expected = if r.scenario.name == "before" { Verdict::Leaky } else { Verdict::Clean };
        assert_eq!(r.leakage.verdict, expected);
    }

    let again = leakguard(&["--allow-presplit-sampling", "run", path_str(&config)]);
    assert!(!again.status.success());

    let cmp_dir = dir.path().join("cmp");
    let mut args = vec!["--out-dir", path_str(&cmp_dir), "compare"];
    args.extend(files.iter().map(|f| path_str(f)));
    let cmp = leakguard(&args);
    assert!(cmp.status.success(), "{}", stderr(&cmp));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(cmp_dir.join("comparison.json")).unwrap()).unwrap();
    let deltas = report["deltas"].as_array().unwrap();
    assert_eq!(deltas.len(), 1);
    assert_eq!(deltas[0]["subject"], "before-42");
    assert!(deltas[0]["deltas"]["recall"].is_f64());
    assert!(cmp_dir.join("comparison.txt").exists());
    assert!(cmp_dir.join("roc-after-42.csv").exists());
}

#[test]
fn seed_override_renames_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CONFIG);
    let out = dir.path().join("o");
    let ok = leakguard(&["--allow-presplit-sampling", "--seed-override", "9", "--out-dir", path_str(&out), "run", path_str(&config)]);
    assert!(ok.status.success(), "{}", stderr(&ok));
    let r = ScenarioResult::from_json(&fs::read_to_string(out.join("after-9.result.json")).unwrap()).unwrap();
    assert_eq!((r.seeds.split_seed, r.seeds.model_seed, r.seeds.sampler_seeds.clone()), (9, 9, vec![9]));
}

#[test]
fn malformed_config_names_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SMALL_CONFIG.replace("\"max_depth\": 3}},\n    {\"name\": \"after\"", "\"max_depth\": -3}},\n    {\"name\": \"after\"");
    let config = write_config(dir.path(), &bad);
    let o = leakguard(&["run", path_str(&config)]);
    assert!(!o.status.success());
    let msg = stderr(&o);
    assert!(msg.contains("scenarios[0].model.max_depth") && msg.contains("line 5"), "{msg}");
}

#[test]
fn missing_inputs_fail_cleanly() {
    let o = leakguard(&["run", "/nonexistent/experiment.json"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("reading config"));
    let o = leakguard(&["stats", "/nonexistent/data.csv"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("stats"));
}

#[test]
fn stats_writes_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    fs::write(&csv, "Time,V1,Amount,Class\n0,1.5,10,0\n3600,2.5,20,0\n7200,0.5,30,1\n10800,1.0,5,0\n").unwrap();
    let out = dir.path().join("stats");
    let o = leakguard(&["--out-dir", path_str(&out), "stats", path_str(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dist: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("class_distribution.json")).unwrap()).unwrap();
    assert_eq!((dist["negative"].as_u64(), dist["positive"].as_u64()), (Some(3), Some(1)));
    let corr = fs::read_to_string(out.join("correlation.csv")).unwrap();
    assert!(corr.starts_with(",Time,V1,Amount\n"));
    let amount = fs::read_to_string(out.join("amount_summary.csv")).unwrap();
    assert!(amount.contains("\n0,3,5,7.5,10,15,20\n"), "{amount}");
}

#[test]
fn shipped_configs_round_trip() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["synthetic_demo.json", "creditcard_baseline.json"] {
        let c = ExperimentConfig::load(&root.join(name)).unwrap();
        let again = ExperimentConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(again, c, "{name}");
    }
}
