//! The active-learning loop, the experiment orchestrator and run persistence.

mod al_loop;
mod config;
mod experiment;
mod persist;

pub use al_loop::{run_al_loop, FoldResources, IterationRecord, LoopSettings};
pub use config::{DatasetSource, ExperimentConfig};
pub use experiment::{
    cell_seed, rank_runlogs, run_experiment, run_experiment_on, summarize, CellFailure, CellSeed,
    ConfigEcho, RunLog, RunSummary, StrategyAggregate,
};
pub use persist::{load_runlog, persist_runlog, read_records, write_curves, write_records, RANK_ALPHA, SCHEMA_VERSION};
