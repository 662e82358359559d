use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, PoolState};
use crate::error::{Error, Result};
use crate::evaluation::{accuracy, NoisyTally, ReverseJudge};
use crate::models::{fit, ClassifierSpec, ProbabilityMatrix, TrainedModel};
use crate::rng::derive_seed;
use crate::strategies::{select_batch, BatchSelection, SelectionContext, Strategy, StrategyParams};

/// State recorded after one select-label-retrain step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub strategy: Strategy,
    pub repeat: usize,
    pub fold: usize,
    /// Starts at 1.
    pub iteration: usize,
    pub batch: Vec<usize>,
    /// Test accuracy of the model retrained with this batch.
    pub accuracy: f64,
    pub batch_nsr: Option<f64>,
    pub cumulative_noisy: Option<usize>,
    /// Samples selected so far in this run, this batch included.
    pub cumulative_selected: usize,
    pub batch_rba: f64,
    /// Set when the unlabeled pool ran out before `n_iterations`.
    pub truncated: bool,
    pub duration_secs: f64,
}

impl IterationRecord {
    pub fn cumulative_nsr(&self) -> Option<f64> {
        self.cumulative_noisy
            .map(|n| n as f64 / self.cumulative_selected as f64)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LoopSettings<'a> {
    pub n_iterations: usize,
    pub batch_size: usize,
    pub params: &'a StrategyParams,
}

/// Strategy-independent state of one (repeat, fold) split, shared by all
/// strategies evaluated on it.
#[derive(Debug, Clone)]
pub struct FoldResources {
    pub repeat: usize,
    pub fold: usize,
    pub pool: PoolState,
    /// Probabilities of a model fitted on the whole training fold, for every dataset row.
    pub ideal_probs: Option<ProbabilityMatrix>,
    pub judge: ReverseJudge,
}

/// Runs the select, label, retrain loop for one strategy from the fold's initial pool.
pub fn run_al_loop(
    dataset: &Dataset,
    fold: &FoldResources,
    strategy: Strategy,
    spec: &ClassifierSpec,
    settings: LoopSettings<'_>,
    seed: u64,
) -> Result<Vec<IterationRecord>> {
    let mut pool = fold.pool.clone();
    pool.validate(dataset.n_samples())?;
    if strategy.needs_ideal_model() && fold.ideal_probs.is_none() {
        return Err(Error::Parameter(format!("{strategy} needs the ideal model")));
    }
    let test_x = dataset.rows(&pool.test);
    let test_y = dataset.labels_of(&pool.test);
    let flags = dataset.noise_flags();
    let mut tally = NoisyTally::default();
    let mut records = Vec::with_capacity(settings.n_iterations);
    let mut model = fit_labeled(dataset, &pool, spec, derive_seed(seed, &["fit".into(), 0u64.into()]))?;

    for iteration in 1..=settings.n_iterations {
        if pool.unlabeled.is_empty() {
            break;
        }
        let start = Instant::now();
        let exhausts = pool.unlabeled.len() <= settings.batch_size;
        let batch = if exhausts {
            BatchSelection::new(pool.unlabeled.clone(), strategy.name())
        } else {
            let ctx = SelectionContext {
                features: dataset.features(),
                labels: dataset.labels(),
                labeled: &pool.labeled,
                unlabeled: &pool.unlabeled,
                model: &model,
                ideal_probs: fold.ideal_probs.as_ref(),
                batch_size: settings.batch_size,
                seed: derive_seed(seed, &["select".into(), iteration.into()]),
                params: settings.params,
            };
            select_batch(strategy, &ctx)?
        };
        pool.label(&batch.indices)?;
        model = fit_labeled(dataset, &pool, spec, derive_seed(seed, &["fit".into(), iteration.into()]))?;
        let acc = accuracy(&model.predict(test_x.view())?, &test_y)?;
        let batch_nsr = flags.map(|f| tally.add(&batch, f)).transpose()?;
        let batch_rba = fold.judge.batch_accuracy(dataset, &batch)?;
        let selected = records
            .last()
            .map_or(0, |r: &IterationRecord| r.cumulative_selected)
            + batch.len();
        records.push(IterationRecord {
            strategy,
            repeat: fold.repeat,
            fold: fold.fold,
            iteration,
            batch: batch.indices,
            accuracy: acc,
            batch_nsr,
            cumulative_noisy: flags.map(|_| tally.noisy),
            cumulative_selected: selected,
            batch_rba,
            truncated: exhausts && iteration < settings.n_iterations,
            duration_secs: start.elapsed().as_secs_f64(),
        });
    }
    Ok(records)
}

fn fit_labeled(dataset: &Dataset, pool: &PoolState, spec: &ClassifierSpec, seed: u64) -> Result<TrainedModel> {
    let x = dataset.rows(&pool.labeled);
    let y = dataset.labels_of(&pool.labeled);
    fit(spec, x.view(), &y, dataset.n_classes(), seed)
        .map_err(|e| Error::Fit(format!("{} labeled samples: {e}", pool.labeled.len())))
}
