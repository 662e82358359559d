//! Scaled version of the low-dimensional noisy-blob benchmark: six strategies,
//! 3 x 2 cross-validation, ten batches of ten.
//!
//! cargo run --release --example synthetic_experiment [-- <output_dir>]

use noisyal::data::BlobConfig;
use noisyal::harness::{persist_runlog, run_experiment, DatasetSource, ExperimentConfig};
use noisyal::strategies::Strategy;

fn main() -> noisyal::Result<()> {
    let blobs = BlobConfig {
        n_samples: 2000,
        n_blobs: 50,
        n_noisy_blobs: 25,
        ..BlobConfig::low_dimensional(7)
    };
    let mut config = ExperimentConfig::new(
        DatasetSource::Blobs(blobs),
        vec![
            Strategy::Random,
            Strategy::KCenter,
            Strategy::Confidence,
            Strategy::IConfidence,
            Strategy::WKMeans,
            Strategy::IWKMeans,
        ],
    );
    config.n_repeats = 3;
    config.seed = 2024;

    let start = std::time::Instant::now();
    let log = run_experiment(&config)?;
    println!("{} runs in {:.1}s", log.runs.len(), start.elapsed().as_secs_f64());
    println!("{:<12} {:>14} {:>14} {:>14}", "strategy", "auc", "nsr", "rba");
    for a in &log.aggregates {
        println!(
            "{:<12} {:>7.2} ({:.2}) {:>7.3} ({:.3}) {:>7.3} ({:.3})",
            a.strategy.name(),
            a.auc_mean,
            a.auc_std,
            a.nsr_mean.unwrap_or(f64::NAN),
            a.nsr_std.unwrap_or(f64::NAN),
            a.rba_mean,
            a.rba_std
        );
    }
    if let Ok(report) = log.rank_report(0.05) {
        println!("\n{}", report.summary());
    }
    if let Some(dir) = std::env::args().nth(1) {
        persist_runlog(&log, dir.as_ref())?;
        println!("results written to {dir}");
    }
    Ok(())
}
