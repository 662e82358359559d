//! Weighted K-Means with fixed centroids on a toy problem: two point groups,
//! one of which already holds a fixed centroid. The moving centroids avoid the
//! fixed one and settle on the groups it does not cover.
//!
//! cargo run --release --example fixed_kmeans

use ndarray::{array, Array2};
use ndarray::ArrayView2;
use noisyal::strategies::{kmeans_fixed, FixedKMeansResult, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// Best of ten seeded restarts.
fn best_of_restarts(points: ArrayView2<'_, f64>, weights: &[f64], fixed: ArrayView2<'_, f64>) -> noisyal::Result<FixedKMeansResult> {
    let mut best: Option<FixedKMeansResult> = None;
    for seed in 0..10 {
        let r = kmeans_fixed(points, weights, 2, fixed, seed, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        if best.as_ref().is_none_or(|b| r.inertia < b.inertia) {
            best = Some(r);
        }
    }
    Ok(best.unwrap())
}

fn main() -> noisyal::Result<()> {
    let points: Array2<f64> = array![
        [0.0, 0.0],
        [0.2, 0.1],
        [0.1, 0.3],
        [10.0, 10.0],
        [10.2, 9.9],
        [9.8, 10.1],
        [20.0, 0.0],
        [20.1, 0.2],
    ];
    let weights = vec![1.0; points.nrows()];
    let fixed = array![[0.1, 0.1]];

    let free = best_of_restarts(points.view(), &weights, Array2::zeros((0, 2)).view())?;
    let pinned = best_of_restarts(points.view(), &weights, fixed.view())?;

    for (name, result) in [("no fixed centroid", &free), ("fixed centroid at (0.1, 0.1)", &pinned)] {
        println!("{name}: inertia {:.3} after {} iterations", result.inertia, result.iterations);
        for (c, row) in result.moving.outer_iter().enumerate() {
            println!("  moving centroid {c}: ({:.2}, {:.2})", row[0], row[1]);
        }
        println!("  assignment {:?}", result.assignment);
        println!("  inertia history {:?}", result.inertia_history);
    }
    Ok(())
}
