use std::sync::Arc;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::al_loop::{run_al_loop, FoldResources, IterationRecord, LoopSettings};
use super::config::ExperimentConfig;
use crate::data::{initial_pool, plan_cv, Dataset};
use crate::error::{Error, Result};
use crate::evaluation::{accuracy_auc, mean, std_dev, RankReport, ReverseJudge};
use crate::models::fit;
use crate::rng::derive_seed;
use crate::strategies::Strategy;

/// One (strategy, repeat, fold) run and its resolved seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSeed {
    pub strategy: Strategy,
    pub repeat: usize,
    pub fold: usize,
    pub seed: u64,
}

/// The config as executed, plus what was derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub config: ExperimentConfig,
    pub dataset_name: String,
    pub n_samples: usize,
    pub n_classes: usize,
    pub cells: Vec<CellSeed>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub strategy: Strategy,
    pub repeat: usize,
    pub fold: usize,
    pub message: String,
}

/// Per-run summary: accuracy AUC, cumulative NSR at the last iteration and
/// mean batch RBA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub strategy: Strategy,
    pub repeat: usize,
    pub fold: usize,
    pub auc: f64,
    pub nsr: Option<f64>,
    pub rba: f64,
    pub n_iterations: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyAggregate {
    pub strategy: Strategy,
    pub n_runs: usize,
    pub auc_mean: f64,
    pub auc_std: f64,
    pub nsr_mean: Option<f64>,
    pub nsr_std: Option<f64>,
    pub rba_mean: f64,
    pub rba_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub config: ConfigEcho,
    pub records: Vec<IterationRecord>,
    pub runs: Vec<RunSummary>,
    pub aggregates: Vec<StrategyAggregate>,
    pub failures: Vec<CellFailure>,
}

impl RunLog {
    pub fn aggregate(&self, strategy: Strategy) -> Option<&StrategyAggregate> {
        self.aggregates.iter().find(|a| a.strategy == strategy)
    }

    pub fn records_of(&self, strategy: Strategy, repeat: usize, fold: usize) -> Vec<&IterationRecord> {
        self.records
            .iter()
            .filter(|r| r.strategy == strategy && r.repeat == repeat && r.fold == fold)
            .collect()
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.config.config.strategies
    }

    /// Friedman + Nemenyi ranking of strategies by AUC, one block per
    /// (repeat, fold). Blocks where some strategy failed are dropped.
    pub fn rank_report(&self, alpha: f64) -> Result<RankReport> {
        rank_runlogs(std::slice::from_ref(self), alpha)
    }
}

/// Ranking across several logs; all must cover the same strategy set.
pub fn rank_runlogs(logs: &[RunLog], alpha: f64) -> Result<RankReport> {
    let first = logs
        .first()
        .ok_or_else(|| Error::Parameter("no run logs to rank".into()))?;
    let strategies = first.strategies().to_vec();
    let mut sorted_first = strategies.clone();
    sorted_first.sort();
    for log in &logs[1..] {
        let mut s = log.strategies().to_vec();
        s.sort();
        if s != sorted_first {
            return Err(Error::Config(format!(
                "strategy sets differ across runs: {:?} vs {:?}",
                names(&strategies),
                names(log.strategies())
            )));
        }
    }
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut dropped = 0;
    for log in logs {
        let cfg = &log.config.config;
        for repeat in 0..cfg.n_repeats {
            for fold in 0..cfg.n_folds {
                let block: Option<Vec<f64>> = strategies
                    .iter()
                    .map(|&s| {
                        log.runs
                            .iter()
                            .find(|r| r.strategy == s && r.repeat == repeat && r.fold == fold)
                            .map(|r| r.auc)
                    })
                    .collect();
                match block {
                    Some(b) => columns.push(b),
                    None => dropped += 1,
                }
            }
        }
    }
    let scores = Array2::from_shape_fn((strategies.len(), columns.len()), |(m, b)| columns[b][m]);
    let mut report = RankReport::build(names(&strategies), &scores, alpha)?;
    report.dropped_blocks = dropped;
    Ok(report)
}

fn names(s: &[Strategy]) -> Vec<String> {
    s.iter().map(|s| s.name().to_string()).collect()
}

pub fn cell_seed(master: u64, strategy: Strategy, repeat: usize, fold: usize) -> u64 {
    derive_seed(master, &[strategy.name().into(), repeat.into(), fold.into()])
}

/// Summaries and aggregates derived from the records alone.
pub fn summarize(
    records: &[IterationRecord],
    strategies: &[Strategy],
    n_repeats: usize,
    n_folds: usize,
) -> Result<(Vec<RunSummary>, Vec<StrategyAggregate>)> {
    let mut runs = Vec::new();
    for &strategy in strategies {
        for repeat in 0..n_repeats {
            for fold in 0..n_folds {
                let rs: Vec<&IterationRecord> = records
                    .iter()
                    .filter(|r| r.strategy == strategy && r.repeat == repeat && r.fold == fold)
                    .collect();
                let Some(last) = rs.last() else { continue };
                let accs: Vec<f64> = rs.iter().map(|r| r.accuracy).collect();
                let rbas: Vec<f64> = rs.iter().map(|r| r.batch_rba).collect();
                runs.push(RunSummary {
                    strategy,
                    repeat,
                    fold,
                    auc: accuracy_auc(&accs)?,
                    nsr: last.cumulative_nsr(),
                    rba: mean(&rbas).expect("non-empty run"),
                    n_iterations: rs.len(),
                    truncated: last.truncated,
                });
            }
        }
    }
    let aggregates = strategies
        .iter()
        .filter_map(|&strategy| {
            let mine: Vec<&RunSummary> = runs.iter().filter(|r| r.strategy == strategy).collect();
            if mine.is_empty() {
                return None;
            }
            let auc: Vec<f64> = mine.iter().map(|r| r.auc).collect();
            let rba: Vec<f64> = mine.iter().map(|r| r.rba).collect();
            let nsr: Option<Vec<f64>> = mine.iter().map(|r| r.nsr).collect();
            Some(StrategyAggregate {
                strategy,
                n_runs: mine.len(),
                auc_mean: mean(&auc)?,
                auc_std: std_dev(&auc)?,
                nsr_mean: nsr.as_deref().and_then(mean),
                nsr_std: nsr.as_deref().and_then(std_dev),
                rba_mean: mean(&rba)?,
                rba_std: std_dev(&rba)?,
            })
        })
        .collect();
    Ok((runs, aggregates))
}

fn fold_resources(
    dataset: &Dataset,
    config: &ExperimentConfig,
    train: &[usize],
    test: &[usize],
    repeat: usize,
    fold: usize,
) -> Result<FoldResources> {
    let master = config.seed;
    let tag = |t: &str| derive_seed(master, &[t.into(), repeat.into(), fold.into()]);
    let pool = initial_pool(
        train,
        test,
        dataset.labels(),
        dataset.n_classes(),
        config.n_seed_per_class,
        tag("pool"),
    )?;
    let ideal_probs = if config.strategies.iter().any(Strategy::needs_ideal_model) {
        let x = dataset.rows(train);
        let y = dataset.labels_of(train);
        let ideal = fit(&config.classifier, x.view(), &y, dataset.n_classes(), tag("ideal"))?;
        Some(ideal.predict_proba(dataset.features())?)
    } else {
        None
    };
    let judge = ReverseJudge::fit(dataset, test, &config.classifier, tag("rba"))?;
    Ok(FoldResources {
        repeat,
        fold,
        pool,
        ideal_probs,
        judge,
    })
}

/// Loads the dataset named by the config and runs every cell.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunLog> {
    config.validate()?;
    let dataset = config.dataset.load()?;
    run_experiment_on(config, &dataset)
}

/// Runs every (strategy, repeat, fold) cell on an already loaded dataset.
/// Cell failures are recorded and do not stop the other cells.
pub fn run_experiment_on(config: &ExperimentConfig, dataset: &Dataset) -> Result<RunLog> {
    config.validate()?;
    let plan = plan_cv(
        dataset.n_samples(),
        dataset.labels(),
        config.n_repeats,
        config.n_folds,
        derive_seed(config.seed, &["cv".into()]),
    )?;
    let threads = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("workers: {e}")))?;
    let params = config.strategy_params();
    let settings = LoopSettings {
        n_iterations: config.n_iterations,
        batch_size: config.batch_size,
        params: &params,
    };

    threads.install(|| {
        let folds: Vec<std::result::Result<Arc<FoldResources>, String>> = plan
            .splits()
            .par_iter()
            .map(|s| {
                fold_resources(dataset, config, &s.train, &s.test, s.repeat, s.fold)
                    .map(Arc::new)
                    .map_err(|e| e.to_string())
            })
            .collect();

        let mut cells = Vec::new();
        for &strategy in &config.strategies {
            for repeat in 0..config.n_repeats {
                for fold in 0..config.n_folds {
                    let seed = cell_seed(config.seed, strategy, repeat, fold);
                    cells.push(CellSeed {
                        strategy,
                        repeat,
                        fold,
                        seed,
                    });
                }
            }
        }

        let outcomes: Vec<std::result::Result<Vec<IterationRecord>, String>> = cells
            .par_iter()
            .map(|c| {
                let res = folds[c.repeat * config.n_folds + c.fold].as_ref().map_err(Clone::clone)?;
                run_al_loop(dataset, res, c.strategy, &config.classifier, settings, c.seed)
                    .map_err(|e| e.to_string())
            })
            .collect();

        let mut records = Vec::new();
        let mut failures = Vec::new();
        for (cell, outcome) in cells.iter().zip(outcomes) {
            match outcome {
                Ok(rs) => records.extend(rs),
                Err(message) => failures.push(CellFailure {
                    strategy: cell.strategy,
                    repeat: cell.repeat,
                    fold: cell.fold,
                    message,
                }),
            }
        }
        let (runs, aggregates) =
            summarize(&records, &config.strategies, config.n_repeats, config.n_folds)?;
        Ok(RunLog {
            config: ConfigEcho {
                config: config.clone(),
                dataset_name: dataset.name().to_string(),
                n_samples: dataset.n_samples(),
                n_classes: dataset.n_classes(),
                cells,
            },
            records,
            runs,
            aggregates,
            failures,
        })
    })
}
