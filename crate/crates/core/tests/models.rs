use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use noisyal::models::{fit, pca, ClassifierSpec, FeatureSubsample, ForestSpec, MlpSpec, RandomForest};

fn random_task(seed: u64, n: usize, d: usize, classes: usize) -> (Array2<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y: Vec<usize> = (0..n).map(|i| i % classes).collect();
    for i in (1..n).rev() {
        y.swap(i, rng.random_range(0..=i));
    }
    let x = Array2::from_shape_fn((n, d), |(i, j)| y[i] as f64 * (j as f64 + 1.0) + rng.random_range(-1.5..1.5));
    (x, y)
}

fn small_mlp() -> ClassifierSpec {
    ClassifierSpec::Mlp(MlpSpec {
        hidden: vec![16, 8],
        epochs: 15,
        ..MlpSpec::default()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn predictions_are_row_stochastic(
        seed in any::<u64>(),
        n in 6usize..60,
        d in 1usize..6,
        classes in 2usize..5,
        use_mlp in any::<bool>(),
        depth in prop::option::of(1usize..6),
    ) {
        let (x, y) = random_task(seed, n, d, classes);
        let spec = if use_mlp {
            small_mlp()
        } else {
            ClassifierSpec::RandomForest(ForestSpec {
                n_trees: 8,
                max_depth: depth,
                ..ForestSpec::default()
            })
        };
        let model = fit(&spec, x.view(), &y, classes, seed).unwrap();
        let (probe, _) = random_task(seed.wrapping_add(1), 25, d, classes);
        let p = model.predict_proba((&probe * 3.0).view()).unwrap();
        for row in p.view().outer_iter() {
            prop_assert!((row.sum() - 1.0).abs() <= 1e-9);
            prop_assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn pca_components_are_orthonormal(seed in any::<u64>(), n in 3usize..30, d in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-10.0..10.0));
        let target = n.min(d);
        let (model, projected) = pca(x.view(), target).unwrap();
        let gram = model.components.dot(&model.components.t());
        for i in 0..target {
            for j in 0..target {
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((gram[[i, j]] - expect).abs() <= 1e-8, "gram[{},{}] = {}", i, j, gram[[i, j]]);
            }
        }
        prop_assert!(model.explained_variance.windows(2).all(|w| w[0] >= w[1] - 1e-9));
        prop_assert_eq!(projected.dim(), (n, target));
    }
}

#[test]
fn mlp_loss_mostly_decreases() {
    let (x, y) = random_task(3, 300, 4, 3);
    let spec = MlpSpec {
        epochs: 60,
        ..MlpSpec::default()
    };
    let model = fit(&ClassifierSpec::Mlp(spec), x.view(), &y, 3, 11).unwrap();
    let losses = model.as_mlp().unwrap().loss_history();
    let increases = losses.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(
        increases as f64 <= 0.05 * (losses.len() - 1) as f64,
        "{increases} increases over {} epochs",
        losses.len()
    );
    assert!(losses.last().unwrap() < &losses[0]);
}

#[test]
fn forest_is_independent_of_worker_count() {
    let (x, y) = random_task(5, 200, 3, 4);
    let spec = ForestSpec {
        n_trees: 30,
        ..ForestSpec::default()
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| RandomForest::fit(&spec, x.view(), &y, 4, 99).predict_proba(x.view()))
    };
    let one = run(1);
    let four = run(4);
    assert!(one.iter().zip(four.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn three_trees_of_four_leaves_embed_to_twelve_columns() {
    let x = Array2::from_shape_fn((8, 1), |(i, _)| i as f64);
    let y = vec![0, 0, 1, 1, 2, 2, 3, 3];
    let spec = ForestSpec {
        n_trees: 3,
        bootstrap: false,
        max_features: FeatureSubsample::All,
        ..ForestSpec::default()
    };
    let forest = RandomForest::fit(&spec, x.view(), &y, 4, 0);
    assert!(forest.trees().iter().all(|t| t.n_leaves() == 4));
    let emb = forest.leaf_embedding(x.view());
    assert_eq!(emb.ncols(), 12);
    for row in emb.outer_iter() {
        assert_eq!(row.sum(), 3.0);
    }
}
