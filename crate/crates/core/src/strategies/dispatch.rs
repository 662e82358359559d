use std::fmt;
use std::str::FromStr;

use ndarray::{ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::{
    iwkmeans_select, kcenter_greedy, score_iconfidence_with, score_lowest_confidence, score_margin,
    select_random, select_top_k, wkmeans_select, BatchSelection, IConfidenceMode,
};
use crate::error::{Error, Result};
use crate::models::{ProbabilityMatrix, TrainedModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Random,
    Confidence,
    IConfidence,
    Margin,
    KCenter,
    WKMeans,
    IWKMeans,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::Random,
        Strategy::Confidence,
        Strategy::IConfidence,
        Strategy::Margin,
        Strategy::KCenter,
        Strategy::WKMeans,
        Strategy::IWKMeans,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Confidence => "confidence",
            Strategy::IConfidence => "iconfidence",
            Strategy::Margin => "margin",
            Strategy::KCenter => "kcenter",
            Strategy::WKMeans => "wkmeans",
            Strategy::IWKMeans => "iwkmeans",
        }
    }

    /// Whether selection needs the model trained on the full training fold.
    pub fn needs_ideal_model(&self) -> bool {
        matches!(self, Strategy::IConfidence)
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|st| st.name() == s.trim())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown strategy `{s}`; valid names: {}",
                    Self::valid_names()
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyParams {
    /// Preselection factor of WKMeans and IWKMeans.
    pub beta: usize,
    /// Target PCA dimension of the KCenter embedding.
    pub kcenter_dim: usize,
    pub iconfidence_mode: IConfidenceMode,
}

impl Default for StrategyParams {
    fn default() -> Self {
        Self {
            beta: 10,
            kcenter_dim: 32,
            iconfidence_mode: IConfidenceMode::Max,
        }
    }
}

/// Everything a strategy may look at when choosing a batch.
pub struct SelectionContext<'a> {
    /// Features of the whole dataset; pool indices refer to its rows.
    pub features: ArrayView2<'a, f64>,
    /// Ground truth, consulted only by [`IConfidenceMode::TrueClass`].
    pub labels: &'a [usize],
    pub labeled: &'a [usize],
    pub unlabeled: &'a [usize],
    pub model: &'a TrainedModel,
    /// Ideal-model probabilities for every dataset row.
    pub ideal_probs: Option<&'a ProbabilityMatrix>,
    pub batch_size: usize,
    pub seed: u64,
    pub params: &'a StrategyParams,
}

pub fn select_batch(strategy: Strategy, ctx: &SelectionContext<'_>) -> Result<BatchSelection> {
    let candidates = ctx.unlabeled;
    let k = ctx.batch_size;
    if candidates.is_empty() {
        return Err(Error::Selection("unlabeled pool is empty".into()));
    }
    let candidate_features = || ctx.features.select(Axis(0), candidates);
    let mut selection = match strategy {
        Strategy::Random => select_random(candidates, k, ctx.seed)?,
        Strategy::Confidence => {
            let probs = ctx.model.predict_proba(candidate_features().view())?;
            select_top_k(&score_lowest_confidence(&probs), candidates, k)?
        }
        Strategy::Margin => {
            let probs = ctx.model.predict_proba(candidate_features().view())?;
            select_top_k(&score_margin(&probs), candidates, k)?
        }
        Strategy::IConfidence => {
            let ideal_all = ctx
                .ideal_probs
                .ok_or_else(|| Error::Parameter("iconfidence needs the ideal model".into()))?;
            let probs = ctx.model.predict_proba(candidate_features().view())?;
            let ideal = ideal_all.select_rows(candidates);
            let truth: Vec<usize> = candidates.iter().map(|&i| ctx.labels[i]).collect();
            let scores =
                score_iconfidence_with(&probs, &ideal, ctx.params.iconfidence_mode, Some(&truth))?;
            select_top_k(&scores, candidates, k)?
        }
        Strategy::KCenter => {
            // Labeled rows first, then candidates, both in ascending sample order.
            let rows: Vec<usize> = ctx.labeled.iter().chain(candidates).copied().collect();
            let x = ctx.features.select(Axis(0), &rows);
            let embedding = ctx.model.embed(x.view(), ctx.params.kcenter_dim)?;
            let n_lab = ctx.labeled.len();
            let labeled_rows: Vec<usize> = (0..n_lab).collect();
            let candidate_rows: Vec<usize> = (n_lab..rows.len()).collect();
            let chosen = kcenter_greedy(embedding.values.view(), &labeled_rows, &candidate_rows, k)?;
            BatchSelection::new(chosen.into_iter().map(|r| rows[r]).collect(), "kcenter")
        }
        Strategy::WKMeans => {
            let x = candidate_features();
            let probs = ctx.model.predict_proba(x.view())?;
            wkmeans_select(x.view(), &probs, candidates, k, ctx.params.beta, ctx.seed)?
        }
        Strategy::IWKMeans => {
            let x = candidate_features();
            let probs = ctx.model.predict_proba(x.view())?;
            let labeled = ctx.features.select(Axis(0), ctx.labeled);
            iwkmeans_select(x.view(), &probs, labeled.view(), candidates, k, ctx.params.beta, ctx.seed)?
        }
    };
    selection.strategy = strategy.name().to_string();
    Ok(selection)
}
