//! Query strategies.

mod dispatch;
mod kcenter;
mod kmeans;
mod scores;
mod select;
mod wkmeans;

pub use kcenter::kcenter_greedy;
pub use kmeans::{
    kmeans_fixed, kmeans_fixed_from, kmeans_plus_plus, FixedKMeansResult, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
pub use scores::{
    score_iconfidence, score_iconfidence_with, score_lowest_confidence, score_margin,
    IConfidenceMode, ScoreVector,
};
pub use select::{select_random, select_top_k, BatchSelection};
pub use wkmeans::{
    iwkmeans_select, iwkmeans_select_detailed, wkmeans_select, wkmeans_select_detailed,
    ClusteredSelection, WEIGHT_FLOOR,
};

pub use dispatch::{select_batch, SelectionContext, Strategy, StrategyParams};
