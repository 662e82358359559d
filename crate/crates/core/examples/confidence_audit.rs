//! Max-probability histogram of out-of-fold predictions, on a clean and a
//! noisy dataset. Noisy blobs pull mass away from the top bin.
//!
//! cargo run --release --example confidence_audit

use noisyal::data::{make_noisy_blobs, BlobConfig};
use noisyal::evaluation::confidence_histogram;
use noisyal::models::ClassifierSpec;

fn main() -> noisyal::Result<()> {
    let base = BlobConfig {
        n_samples: 1000,
        n_blobs: 30,
        ..BlobConfig::low_dimensional(8)
    };
    for noisy in [0, 15] {
        let data = make_noisy_blobs(&BlobConfig {
            n_noisy_blobs: noisy,
            ..base.clone()
        })?;
        let hist = confidence_histogram(&data, &ClassifierSpec::default(), 10, 0)?;
        println!("{noisy} noisy blobs: {:.1}% of mass at >= 0.9", 100.0 * hist.mass_at_least(0.9));
        hist.write_csv(std::io::stdout().lock())?;
    }
    Ok(())
}
