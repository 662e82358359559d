//! Noisy sample ratio and reverse batch accuracy for two hand-picked batches:
//! one drawn from regular blobs, one from noisy blobs.
//!
//! cargo run --release --example noise_metrics

use noisyal::data::{make_noisy_blobs, plan_cv, BlobConfig};
use noisyal::evaluation::{NoisyTally, ReverseJudge};
use noisyal::models::ClassifierSpec;
use noisyal::strategies::BatchSelection;

fn main() -> noisyal::Result<()> {
    let data = make_noisy_blobs(&BlobConfig {
        n_samples: 2000,
        n_blobs: 40,
        n_noisy_blobs: 20,
        ..BlobConfig::low_dimensional(11)
    })?;
    let flags = data.noise_flags().unwrap();
    let split = plan_cv(data.n_samples(), data.labels(), 1, 2, 0)?.split(0, 0);
    let judge = ReverseJudge::fit(&data, &split.test, &ClassifierSpec::default(), 4)?;

    let pick = |noisy: bool| -> BatchSelection {
        let indices = split.train.iter().copied().filter(|&i| flags[i] == noisy).take(50).collect();
        BatchSelection::new(indices, "hand-picked")
    };
    let mut tally = NoisyTally::default();
    for (name, batch) in [("regular", pick(false)), ("noisy", pick(true))] {
        let batch_nsr = tally.add(&batch, flags)?;
        let batch_rba = judge.batch_accuracy(&data, &batch)?;
        println!("{name:<8} batch: nsr {batch_nsr:.2}  rba {batch_rba:.2}");
    }
    println!("cumulative nsr {:.2}", tally.cumulative_nsr().unwrap());
    Ok(())
}
