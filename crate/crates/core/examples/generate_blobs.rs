//! Generates the low-dimensional noisy-blob problem and writes it as CSV.
//!
//! cargo run --release --example generate_blobs [-- <out.csv>]

use noisyal::data::{make_noisy_blobs_with_layout, write_csv, BlobConfig};

fn main() -> noisyal::Result<()> {
    let config = BlobConfig::low_dimensional(1);
    let (data, layout) = make_noisy_blobs_with_layout(&config)?;
    let noisy = data.noise_flags().unwrap().iter().filter(|&&f| f).count();
    println!("{}", data.name());
    println!(
        "{} samples, {} features, {} classes, {} noisy samples",
        data.n_samples(),
        data.n_features(),
        data.n_classes(),
        noisy
    );
    println!("closest pair of blob centers: {:.2}", layout.min_center_distance());
    let occupancy = layout.occupancy();
    println!(
        "blob occupancy: min {} max {}",
        occupancy.iter().min().unwrap(),
        occupancy.iter().max().unwrap()
    );
    if let Some(path) = std::env::args().nth(1) {
        write_csv(&data, path.as_ref())?;
        println!("written to {path}");
    }
    Ok(())
}
