use leakguard::dataset::{
    generate_synthetic_imbalanced, load_csv, stratified_split, write_csv, CsvSchema, FeatureMatrix, FitScope,
    SplitSpec, TabularDataset,
};
use leakguard::experiment::{detect_leakage, run_scenario, Placement, ScenarioSpec, Verdict};
use leakguard::gbdt::GbdtParams;
use leakguard::sampling::{apply_pipeline, SamplerKind, SamplerPipeline, SamplerSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn brute_force_pairs(train: &TabularDataset, test: &TabularDataset) -> usize {
    let mut n = 0;
    for a in train.features().rows() {
        for b in test.features().rows() {
            if a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()) {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn planted_duplicates_match_quadratic_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..20 {
        let data = generate_synthetic_imbalanced(300, 0.1, 3, 1.0, trial).unwrap();
        let (train, test) = stratified_split(&data, &SplitSpec { seed: trial, ..SplitSpec::default() }).unwrap();
        let mut rows: Vec<Vec<f64>> = test.features().rows().map(<[f64]>::to_vec).collect();
        let planted = rng.random_range(0..10);
        for _ in 0..planted {
            let src = rng.random_range(0..train.n_rows());
            let dst = rng.random_range(0..rows.len());
            rows[dst] = train.row(src).to_vec();
        }
        let test = TabularDataset::new(
            FeatureMatrix::from_rows(&rows).unwrap(),
            test.feature_names().to_vec(),
            test.labels().to_vec(),
            test.provenance().to_vec(),
        )
        .unwrap();
        let report = detect_leakage(&train, &test, FitScope::TrainOnly);
        let want = brute_force_pairs(&train, &test);
        assert_eq!(report.duplicate_pairs_across_split, want);
        assert_eq!(report.verdict == Verdict::Leaky, want > 0);
    }
}

#[test]
fn pre_split_random_oversampling_leaks_duplicates() {
    let data = generate_synthetic_imbalanced(2000, 0.05, 3, 1.0, 2).unwrap();
    let pipeline = SamplerPipeline::single(SamplerSpec::new(SamplerKind::RandomOver, 1.0, 3)).unwrap();
    let mut spec = ScenarioSpec::new("ros", Placement::SamplingBeforeSplit, Some(pipeline));
    spec.model = GbdtParams { n_estimators: 5, max_depth: 3, ..GbdtParams::default() };
    let r = run_scenario(&data, &spec).unwrap();
    assert!(r.leakage.duplicated_rows_in_test > 0);
    assert!(r.leakage.duplicate_pairs_across_split > 0);
    assert!(r.leakage.shared_sources_across_split > 0);
    assert_eq!(r.leakage.verdict, Verdict::Leaky);
}

#[test]
fn csv_round_trip_preserves_values() {
    let data = generate_synthetic_imbalanced(200, 0.1, 4, 1.0, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    write_csv(&data, std::fs::File::create(&path).unwrap()).unwrap();
    let back = load_csv(&path, &CsvSchema::any("Class")).unwrap();
    assert_eq!(back, data);
}

#[test]
fn under_then_over_ordering_is_expressible() {
    let data = generate_synthetic_imbalanced(1050, 50.0 / 1050.0, 3, 1.0, 4).unwrap();
    let pipeline = SamplerPipeline::new(vec![
        SamplerSpec::new(SamplerKind::RandomUnder, 0.1, 1),
        SamplerSpec::smote(0.5, 5, 2),
    ])
    .unwrap();
    let out = apply_pipeline(&data, &pipeline).unwrap();
    assert_eq!(out.class_counts(), [500, 250]);
}
