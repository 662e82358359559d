//! Friedman test and Nemenyi critical distance over a small score table.
//!
//! cargo run --release --example friedman_ranking

use ndarray::array;
use noisyal::evaluation::{nemenyi_cd, RankReport};

fn main() -> noisyal::Result<()> {
    let methods = ["random", "margin", "wkmeans", "iwkmeans"].map(String::from).to_vec();
    // One row per method, one column per (repeat, fold) block.
    let scores = array![
        [61.0, 58.5, 60.2, 59.9, 62.1, 60.4],
        [55.2, 54.8, 57.1, 53.9, 56.0, 55.5],
        [63.0, 61.7, 62.9, 62.2, 63.5, 61.9],
        [64.1, 62.0, 63.3, 63.8, 64.0, 62.5],
    ];
    let report = RankReport::build(methods, &scores, 0.05)?;
    println!("{}", report.summary());
    println!("critical distance at alpha 0.10: {:.3}", nemenyi_cd(4, 6, 0.10)?);
    Ok(())
}
