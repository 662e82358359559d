use std::collections::HashSet;

use noisyal::data::{initial_pool, plan_cv, BlobConfig, Dataset};
use noisyal::evaluation::ReverseJudge;
use noisyal::harness::{
    load_runlog, persist_runlog, run_al_loop, run_experiment, run_experiment_on, summarize, DatasetSource,
    ExperimentConfig, FoldResources, LoopSettings, RunLog, SCHEMA_VERSION,
};
use noisyal::models::{fit, ClassifierSpec, ForestSpec};
use noisyal::strategies::{Strategy, StrategyParams};
use noisyal::Error;

fn small_forest() -> ClassifierSpec {
    ClassifierSpec::RandomForest(ForestSpec {
        n_trees: 15,
        ..ForestSpec::default()
    })
}

fn blobs(n_samples: usize, seed: u64) -> BlobConfig {
    BlobConfig {
        n_samples,
        n_features: 2,
        n_classes: 4,
        n_blobs: 12,
        n_noisy_blobs: 4,
        ..BlobConfig::low_dimensional(seed)
    }
}

fn small_config(strategies: Vec<Strategy>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(DatasetSource::Blobs(blobs(240, 3)), strategies);
    cfg.classifier = small_forest();
    cfg.n_iterations = 3;
    cfg.batch_size = 4;
    cfg.n_repeats = 2;
    cfg.seed = 5;
    cfg
}

fn fold(dataset: &Dataset, n_seed_per_class: usize, with_ideal: bool) -> FoldResources {
    let plan = plan_cv(dataset.n_samples(), dataset.labels(), 1, 2, 1).unwrap();
    let split = plan.split(0, 0);
    let pool = initial_pool(&split.train, &split.test, dataset.labels(), dataset.n_classes(), n_seed_per_class, 2).unwrap();
    let spec = small_forest();
    let ideal_probs = with_ideal.then(|| {
        let m = fit(&spec, dataset.rows(&split.train).view(), &dataset.labels_of(&split.train), dataset.n_classes(), 3).unwrap();
        m.predict_proba(dataset.features()).unwrap()
    });
    FoldResources {
        repeat: 0,
        fold: 0,
        judge: ReverseJudge::fit(dataset, &split.test, &spec, 4).unwrap(),
        pool,
        ideal_probs,
    }
}

#[test]
fn twenty_batches_of_twenty() {
    let data = noisyal::data::make_noisy_blobs(&blobs(1200, 1)).unwrap();
    let res = fold(&data, 1, true);
    let params = StrategyParams::default();
    let settings = LoopSettings {
        n_iterations: 20,
        batch_size: 20,
        params: &params,
    };
    for strategy in [Strategy::Random, Strategy::IConfidence, Strategy::IWKMeans] {
        let records = run_al_loop(&data, &res, strategy, &small_forest(), settings, 9).unwrap();
        assert_eq!(records.len(), 20);
        let iterations: Vec<usize> = records.iter().map(|r| r.iteration).collect();
        assert_eq!(iterations, (1..=20).collect::<Vec<_>>());
        let mut seen = HashSet::new();
        let test: HashSet<usize> = res.pool.test.iter().copied().collect();
        for (i, r) in records.iter().enumerate() {
            assert_eq!(r.batch.len(), 20);
            assert_eq!(r.cumulative_selected, 20 * (i + 1));
            assert!(!r.truncated);
            for b in &r.batch {
                assert!(seen.insert(*b), "{b} selected twice");
                assert!(!test.contains(b), "test sample {b} was labeled");
            }
            let noisy = r.batch.iter().filter(|&&b| data.noise_flags().unwrap()[b]).count();
            assert_eq!(r.batch_nsr, Some(noisy as f64 / 20.0));
        }
        assert_eq!(seen.len(), 400);
        let flagged = seen.iter().filter(|&&b| data.noise_flags().unwrap()[b]).count();
        assert_eq!(records.last().unwrap().cumulative_noisy, Some(flagged));
    }
}

#[test]
fn oversized_batch_consumes_pool_once() {
    let data = noisyal::data::make_noisy_blobs(&blobs(80, 2)).unwrap();
    let res = fold(&data, 1, false);
    let params = StrategyParams::default();
    let settings = LoopSettings {
        n_iterations: 5,
        batch_size: 1000,
        params: &params,
    };
    let records = run_al_loop(&data, &res, Strategy::Margin, &small_forest(), settings, 1).unwrap();
    assert_eq!(records.len(), 1);
    assert!(records[0].truncated);
    assert_eq!(records[0].batch.len(), res.pool.unlabeled.len());
}

#[test]
fn iconfidence_without_ideal_model_is_rejected() {
    let data = noisyal::data::make_noisy_blobs(&blobs(80, 2)).unwrap();
    let res = fold(&data, 1, false);
    let params = StrategyParams::default();
    let settings = LoopSettings {
        n_iterations: 1,
        batch_size: 2,
        params: &params,
    };
    assert!(run_al_loop(&data, &res, Strategy::IConfidence, &small_forest(), settings, 1).is_err());
}

#[test]
fn one_strategy_two_folds_gives_two_runs() {
    let mut cfg = small_config(vec![Strategy::Confidence]);
    cfg.n_repeats = 1;
    let log = run_experiment(&cfg).unwrap();
    assert_eq!(log.runs.len(), 2);
    assert_eq!(log.records.len(), 2 * cfg.n_iterations);
    let agg = log.aggregate(Strategy::Confidence).unwrap();
    assert_eq!(agg.auc_mean, (log.runs[0].auc + log.runs[1].auc) / 2.0);
}

#[test]
fn six_strategies_five_repeats_two_folds_is_sixty_runs() {
    let mut cfg = small_config(vec![
        Strategy::Random,
        Strategy::KCenter,
        Strategy::Confidence,
        Strategy::IConfidence,
        Strategy::WKMeans,
        Strategy::IWKMeans,
    ]);
    cfg.n_repeats = 5;
    cfg.n_iterations = 2;
    let log = run_experiment(&cfg).unwrap();
    assert!(log.failures.is_empty(), "{:?}", log.failures);
    assert_eq!(log.runs.len(), 60);
    assert_eq!(log.config.cells.len(), 60);

    let (runs, aggregates) = summarize(&log.records, &cfg.strategies, cfg.n_repeats, cfg.n_folds).unwrap();
    assert_eq!(runs, log.runs);
    assert_eq!(aggregates, log.aggregates);

    let report = log.rank_report(0.05).unwrap();
    assert_eq!(report.mean_ranks.len(), 6);
    assert_eq!(report.n_blocks, 10);
    for r in &report.mean_ranks {
        assert!((1.0..=6.0).contains(r));
    }

    let dir = tempfile::tempdir().unwrap();
    persist_runlog(&log, dir.path()).unwrap();
    let back = load_runlog(dir.path()).unwrap();
    assert_eq!(back, log);
    let rows = std::fs::read_to_string(dir.path().join("records.csv")).unwrap().lines().count() - 1;
    assert_eq!(rows, 60 * cfg.n_iterations);
    assert!(dir.path().join("rank_report.json").is_file());
    assert!(dir.path().join("curves.csv").is_file());
}

#[test]
fn cells_are_isolated_from_each_other_and_from_worker_count() {
    let full = small_config(vec![Strategy::Random, Strategy::IConfidence, Strategy::WKMeans]);
    let mut reduced = full.clone();
    reduced.strategies = vec![Strategy::WKMeans];
    reduced.workers = Some(1);
    let data = full.dataset.load().unwrap();
    let a = run_experiment_on(&full, &data).unwrap();
    let b = run_experiment_on(&reduced, &data).unwrap();
    let strip = |log: &RunLog, s| {
        log.records
            .iter()
            .filter(|r| r.strategy == s)
            .map(|r| (r.batch.clone(), r.accuracy.to_bits(), r.batch_rba.to_bits()))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&a, Strategy::WKMeans), strip(&b, Strategy::WKMeans));
    assert!(!strip(&b, Strategy::WKMeans).is_empty());
}

#[test]
fn failed_cells_are_recorded_and_others_still_run() {
    // About ten samples per class leave roughly five per class in a training
    // fold, far short of twenty seeds.
    let mut cfg = small_config(vec![Strategy::Random]);
    cfg.dataset = DatasetSource::Blobs(BlobConfig {
        n_samples: 40,
        ..blobs(40, 4)
    });
    cfg.n_seed_per_class = 20;
    let log = run_experiment(&cfg).unwrap();
    assert_eq!(log.failures.len(), 4);
    assert!(log.runs.is_empty());
    assert!(log.failures[0].message.contains("seeding"));
}

#[test]
fn loading_needs_a_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_runlog(dir.path()), Err(Error::NotFound(_))));
}

#[test]
fn schema_version_mismatch_is_reported() {
    let log = run_experiment(&small_config(vec![Strategy::Random])).unwrap();
    let dir = tempfile::tempdir().unwrap();
    persist_runlog(&log, dir.path()).unwrap();
    let path = dir.path().join("config.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let bumped = text.replace(
        &format!("\"schema_version\": {SCHEMA_VERSION}"),
        &format!("\"schema_version\": {}", SCHEMA_VERSION + 1),
    );
    assert_ne!(text, bumped);
    std::fs::write(&path, bumped).unwrap();
    match load_runlog(dir.path()) {
        Err(Error::SchemaVersion { found, expected }) => {
            assert_eq!((found, expected), (SCHEMA_VERSION + 1, SCHEMA_VERSION));
        }
        other => panic!("expected a schema version error, got {other:?}"),
    }
}

#[test]
fn real_dataset_records_have_no_nsr() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/wine.csv");
    let mut cfg = small_config(vec![Strategy::Random, Strategy::Margin]);
    cfg.dataset = DatasetSource::Csv {
        path,
        label_column: "label".into(),
        noise_column: None,
    };
    cfg.n_repeats = 1;
    let log = run_experiment(&cfg).unwrap();
    assert!(log.records.iter().all(|r| r.batch_nsr.is_none() && r.cumulative_noisy.is_none()));
    assert!(log.aggregates.iter().all(|a| a.nsr_mean.is_none()));
    let dir = tempfile::tempdir().unwrap();
    persist_runlog(&log, dir.path()).unwrap();
    assert_eq!(load_runlog(dir.path()).unwrap(), log);
}
