use ndarray::{array, Array2};
use proptest::prelude::*;

use noisyal::models::{fit, ClassifierSpec, ForestSpec, ProbabilityMatrix};
use noisyal::strategies::{
    iwkmeans_select, iwkmeans_select_detailed, select_batch, wkmeans_select, wkmeans_select_detailed,
    SelectionContext, Strategy, StrategyParams,
};

fn probs_from_top(p: &[f64]) -> ProbabilityMatrix {
    ProbabilityMatrix::new(Array2::from_shape_fn((p.len(), 2), |(i, c)| if c == 0 { p[i] } else { 1.0 - p[i] }))
        .unwrap()
}

fn weighted_cost(points: &Array2<f64>, w: &[f64], members: &[usize]) -> f64 {
    let mass: f64 = members.iter().map(|&i| w[i]).sum();
    let d = points.ncols();
    let mean: Vec<f64> = (0..d)
        .map(|j| members.iter().map(|&i| w[i] * points[[i, j]]).sum::<f64>() / mass)
        .collect();
    members
        .iter()
        .map(|&i| w[i] * (0..d).map(|j| (points[[i, j]] - mean[j]).powi(2)).sum::<f64>())
        .sum()
}

/// Minimum weighted inertia over every split of the points into two
/// non-empty groups.
fn best_two_partition(points: &Array2<f64>, w: &[f64]) -> (f64, u32) {
    let n = points.nrows();
    let mut best = (f64::INFINITY, 0);
    for mask in 1..(1u32 << n) - 1 {
        let a: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let b: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 0).collect();
        let cost = weighted_cost(points, w, &a) + weighted_cost(points, w, &b);
        if cost < best.0 {
            best = (cost, mask);
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wkmeans_two_far_groups_match_exhaustive_partition(
        left in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..6),
        right in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..6),
        tops in prop::collection::vec(0.5f64..0.8, 10),
        seed in any::<u64>(),
    ) {
        let n_left = left.len();
        let pts: Vec<(f64, f64)> = left.into_iter().chain(right.into_iter().map(|(x, y)| (x + 50.0, y))).collect();
        let n = pts.len();
        let points = Array2::from_shape_fn((n, 2), |(i, j)| if j == 0 { pts[i].0 } else { pts[i].1 });
        let probs = probs_from_top(&tops[..n]);
        let weights: Vec<f64> = tops[..n].iter().map(|p| 1.0 - (2.0 * p - 1.0)).collect();
        let candidates: Vec<usize> = (100..100 + n).collect();

        let out = wkmeans_select_detailed(points.view(), &probs, &candidates, 2, 10, seed).unwrap();
        let (oracle, _) = best_two_partition(&points, &weights);
        prop_assert!((out.clustering.inertia - oracle).abs() <= 1e-9 * oracle.max(1.0),
            "inertia {} vs exhaustive {}", out.clustering.inertia, oracle);
        let sides: Vec<bool> = out.selection.indices.iter().map(|&i| i - 100 < n_left).collect();
        prop_assert_eq!(sides.len(), 2);
        prop_assert!(sides[0] != sides[1], "both picks on one side: {:?}", out.selection.indices);
    }

    #[test]
    fn remote_labeled_point_changes_nothing(
        pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 4..20),
        tops in prop::collection::vec(0.34f64..1.0, 20),
        k in 1usize..4,
        seed in any::<u64>(),
    ) {
        let n = pts.len();
        let points = Array2::from_shape_fn((n, 2), |(i, j)| if j == 0 { pts[i].0 } else { pts[i].1 });
        let probs = probs_from_top(&tops[..n].iter().map(|p| p.max(0.5)).collect::<Vec<_>>());
        let candidates: Vec<usize> = (0..n).collect();
        // Data diameter is below 9, so 1e4 is more than 10^3 diameters away.
        let remote = array![[1e4, 1e4]];
        let w = wkmeans_select(points.view(), &probs, &candidates, k, 3, seed).unwrap();
        let iw = iwkmeans_select(points.view(), &probs, remote.view(), &candidates, k, 3, seed).unwrap();
        prop_assert_eq!(w.indices, iw.indices);
    }

    #[test]
    fn iwkmeans_moves_away_from_labeled_cluster(
        jitter in prop::collection::vec((-0.05f64..0.05, -0.05f64..0.05), 20),
        seed in any::<u64>(),
    ) {
        // Ten candidates hug the labeled point at the origin, ten sit far away.
        let pts: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let base = if i < 10 { 1.0 } else { 10.0 };
                (base + jitter[i].0, jitter[i].1)
            })
            .collect();
        let points = Array2::from_shape_fn((20, 2), |(i, j)| if j == 0 { pts[i].0 } else { pts[i].1 });
        let probs = probs_from_top(&[0.5; 20]);
        let labeled = array![[0.0, 0.0]];
        let candidates: Vec<usize> = (0..20).collect();
        let out = iwkmeans_select_detailed(points.view(), &probs, labeled.view(), &candidates, 1, 20, seed).unwrap();

        // Exhaustive check over the two placements of the moving centroid.
        let inertia_with = |centroid: (f64, f64)| -> f64 {
            pts.iter()
                .map(|&(x, y)| {
                    let to_moving = (x - centroid.0).powi(2) + (y - centroid.1).powi(2);
                    let to_fixed = x * x + y * y;
                    to_moving.min(to_fixed)
                })
                .sum()
        };
        let mean_of = |r: std::ops::Range<usize>| {
            let c = r.len() as f64;
            (pts[r.clone()].iter().map(|p| p.0).sum::<f64>() / c, pts[r].iter().map(|p| p.1).sum::<f64>() / c)
        };
        let near = inertia_with(mean_of(0..10));
        let far = inertia_with(mean_of(10..20));
        prop_assert!(far < near);
        prop_assert!(out.clustering.moving[[0, 0]] > 5.0, "centroid at {:?}", out.clustering.moving);
        prop_assert!(out.selection.indices[0] >= 10);
        prop_assert_eq!(out.clustering.fixed.clone(), labeled);
    }
}

fn toy_problem(n: usize, seed: u64) -> (Array2<f64>, Vec<usize>) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let y: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let x = Array2::from_shape_fn((n, 2), |(i, j)| y[i] as f64 * if j == 0 { 3.0 } else { -2.0 } + rng.random_range(-2.0..2.0));
    (x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_strategy_returns_distinct_unlabeled_indices(
        seed in any::<u64>(),
        n_labeled in 3usize..12,
        k in 1usize..40,
    ) {
        let (x, y) = toy_problem(60, seed);
        let labeled: Vec<usize> = (0..n_labeled).collect();
        let unlabeled: Vec<usize> = (n_labeled..60).collect();
        let spec = ClassifierSpec::RandomForest(ForestSpec { n_trees: 10, ..ForestSpec::default() });
        let lx = x.select(ndarray::Axis(0), &labeled);
        let ly: Vec<usize> = labeled.iter().map(|&i| y[i]).collect();
        let model = fit(&spec, lx.view(), &ly, 3, seed).unwrap();
        let ideal = fit(&spec, x.view(), &y, 3, seed ^ 1).unwrap().predict_proba(x.view()).unwrap();
        let params = StrategyParams::default();
        for strategy in Strategy::ALL {
            let ctx = SelectionContext {
                features: x.view(),
                labels: &y,
                labeled: &labeled,
                unlabeled: &unlabeled,
                model: &model,
                ideal_probs: Some(&ideal),
                batch_size: k,
                seed,
                params: &params,
            };
            let batch = select_batch(strategy, &ctx).unwrap();
            let mut sorted = batch.indices.clone();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), batch.len(), "{} returned duplicates", strategy);
            prop_assert_eq!(batch.len(), k.min(unlabeled.len()), "{} size", strategy);
            prop_assert!(batch.indices.iter().all(|i| unlabeled.contains(i)), "{} left the pool", strategy);
            prop_assert_eq!(batch.strategy.as_str(), strategy.name());
        }
    }
}
