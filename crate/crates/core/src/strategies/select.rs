use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::ScoreVector;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Samples chosen by a strategy at one iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSelection {
    pub indices: Vec<usize>,
    pub strategy: String,
    pub iteration: usize,
}

impl BatchSelection {
    pub fn new(indices: Vec<usize>, strategy: impl Into<String>) -> Self {
        Self {
            indices,
            strategy: strategy.into(),
            iteration: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Positions (into `scores`) of the `k` best scores, best first; ties go to
/// the smaller candidate index.
pub(crate) fn top_k_positions(scores: &[f64], candidates: &[usize], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(candidates[a].cmp(&candidates[b]))
    });
    order.truncate(k.min(order.len()));
    order
}

pub fn select_top_k(scores: &ScoreVector, candidate_indices: &[usize], k: usize) -> Result<BatchSelection> {
    if candidate_indices.is_empty() {
        return Err(Error::Selection("empty candidate set".into()));
    }
    if k == 0 {
        return Err(Error::Parameter("k must be positive".into()));
    }
    if scores.len() != candidate_indices.len() {
        return Err(Error::Shape(format!(
            "{} scores for {} candidates",
            scores.len(),
            candidate_indices.len()
        )));
    }
    let picked = top_k_positions(scores.as_slice(), candidate_indices, k)
        .into_iter()
        .map(|p| candidate_indices[p])
        .collect();
    Ok(BatchSelection::new(picked, "top_k"))
}

pub fn select_random(candidate_indices: &[usize], k: usize, seed: u64) -> Result<BatchSelection> {
    if candidate_indices.is_empty() {
        return Err(Error::Selection("empty candidate set".into()));
    }
    if k == 0 {
        return Err(Error::Parameter("k must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let k = k.min(candidate_indices.len());
    let picked = sample(&mut rng, candidate_indices.len(), k)
        .into_iter()
        .map(|p| candidate_indices[p])
        .collect();
    Ok(BatchSelection::new(picked, "random"))
}
