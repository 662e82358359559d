//! Experiment on a CSV dataset without noise annotations: the wine data
//! bundled with the tests. NSR is unavailable, so only AUC and RBA are shown.
//!
//! cargo run --release --example csv_experiment

use noisyal::harness::{run_experiment, DatasetSource, ExperimentConfig};
use noisyal::strategies::Strategy;

fn main() -> noisyal::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/wine.csv");
    let source = DatasetSource::Csv {
        path,
        label_column: "label".into(),
        noise_column: None,
    };
    let mut config = ExperimentConfig::new(source, vec![Strategy::Random, Strategy::Margin, Strategy::WKMeans, Strategy::IWKMeans]);
    config.n_iterations = 10;
    config.batch_size = 5;
    config.n_repeats = 3;
    config.seed = 9;

    let log = run_experiment(&config)?;
    println!("{} ({} samples, {} classes)", log.config.dataset_name, log.config.n_samples, log.config.n_classes);
    for a in &log.aggregates {
        println!("{:<10} auc {:.2} ({:.2})  rba {:.3}", a.strategy.name(), a.auc_mean, a.auc_std, a.rba_mean);
    }
    println!("\n{}", log.rank_report(0.05)?.summary());
    Ok(())
}
