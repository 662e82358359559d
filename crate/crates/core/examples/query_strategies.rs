//! Runs every query strategy once from the same labeled pool and reports how
//! many noisy samples each batch contains.
//!
//! cargo run --release --example query_strategies

use noisyal::data::{initial_pool, make_noisy_blobs, plan_cv, BlobConfig};
use noisyal::evaluation::nsr;
use noisyal::models::{fit, ClassifierSpec, ForestSpec};
use noisyal::strategies::{select_batch, SelectionContext, Strategy, StrategyParams};

fn main() -> noisyal::Result<()> {
    let data = make_noisy_blobs(&BlobConfig {
        n_samples: 1500,
        n_blobs: 40,
        n_noisy_blobs: 20,
        ..BlobConfig::low_dimensional(5)
    })?;
    let plan = plan_cv(data.n_samples(), data.labels(), 1, 2, 0)?;
    let split = plan.split(0, 0);
    let mut pool = initial_pool(&split.train, &split.test, data.labels(), data.n_classes(), 1, 0)?;

    let spec = ClassifierSpec::RandomForest(ForestSpec {
        n_trees: 50,
        ..ForestSpec::default()
    });
    // Grow the labeled set a little so the model has something to go on.
    let warmup: Vec<usize> = pool.unlabeled.iter().copied().step_by(15).collect();
    pool.label(&warmup)?;
    let model = fit(&spec, data.rows(&pool.labeled).view(), &data.labels_of(&pool.labeled), data.n_classes(), 1)?;
    let ideal = fit(&spec, data.rows(&split.train).view(), &data.labels_of(&split.train), data.n_classes(), 2)?
        .predict_proba(data.features())?;
    println!("{} labeled, {} unlabeled", pool.labeled.len(), pool.unlabeled.len());

    let params = StrategyParams::default();
    for strategy in Strategy::ALL {
        let ctx = SelectionContext {
            features: data.features(),
            labels: data.labels(),
            labeled: &pool.labeled,
            unlabeled: &pool.unlabeled,
            model: &model,
            ideal_probs: Some(&ideal),
            batch_size: 20,
            seed: 3,
            params: &params,
        };
        let batch = select_batch(strategy, &ctx)?;
        println!("{:<12} nsr {:.2}  batch {:?}", strategy.name(), nsr(&batch, data.noise_flags())?, &batch.indices[..5]);
    }
    Ok(())
}
