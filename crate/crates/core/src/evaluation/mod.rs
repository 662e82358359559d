//! Metrics, the max-probability audit and statistical ranking.

mod histogram;
mod metrics;
mod ranking;

pub use histogram::{bin_max_probabilities, confidence_histogram, ConfidenceHistogram, HistogramBin};
pub use metrics::{
    accuracy, accuracy_auc, mean, nsr, quantile, rba, std_dev, MetricSeries, NoisyTally,
    ReverseJudge,
};
pub use ranking::{
    friedman_test, nemenyi_cd, nemenyi_q, rank_descending, FriedmanResult, RankReport,
    NEMENYI_Q_005, NEMENYI_Q_010,
};
