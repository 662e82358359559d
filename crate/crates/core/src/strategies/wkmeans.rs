//! Two-step diverse samplers: margin preselection of `beta * k` candidates,
//! then weighted K-Means over them. IWKMeans adds one fixed centroid per
//! labeled sample.

use ndarray::{Array2, ArrayView2, Axis};

use super::kmeans::{kmeans_fixed, sq_dist, FixedKMeansResult, DEFAULT_MAX_ITER, DEFAULT_TOL};
use super::select::{top_k_positions, BatchSelection};
use super::scores::score_margin;
use crate::error::{Error, Result};
use crate::models::ProbabilityMatrix;

/// Floor applied to margin weights so weighted means stay defined.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// Output of a (I)WKMeans selection, with the clustering for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteredSelection {
    pub selection: BatchSelection,
    /// Positions into the candidate list that survived margin preselection.
    pub preselected: Vec<usize>,
    pub clustering: FixedKMeansResult,
}

fn check_inputs(
    points: ArrayView2<'_, f64>,
    probs: &ProbabilityMatrix,
    candidate_indices: &[usize],
    k: usize,
    beta: usize,
) -> Result<()> {
    if candidate_indices.is_empty() {
        return Err(Error::Selection("empty candidate set".into()));
    }
    if k == 0 {
        return Err(Error::Parameter("k must be positive".into()));
    }
    if beta == 0 {
        return Err(Error::Parameter("beta must be >= 1".into()));
    }
    if points.nrows() != candidate_indices.len() || probs.n_rows() != candidate_indices.len() {
        return Err(Error::Shape(format!(
            "{} candidates, {} point rows, {} probability rows",
            candidate_indices.len(),
            points.nrows(),
            probs.n_rows()
        )));
    }
    Ok(())
}

/// Matches each moving centroid to a distinct preselected point, greedily by
/// ascending (distance, centroid, point). Output is in centroid order.
fn extract(points: ArrayView2<'_, f64>, moving: &Array2<f64>) -> Vec<usize> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(moving.nrows() * points.nrows());
    for (c, centroid) in moving.outer_iter().enumerate() {
        for (p, point) in points.outer_iter().enumerate() {
            pairs.push((sq_dist(centroid, point), c, p));
        }
    }
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut point_of = vec![usize::MAX; moving.nrows()];
    let mut used = vec![false; points.nrows()];
    let mut left = moving.nrows().min(points.nrows());
    for (_, c, p) in pairs {
        if left == 0 {
            break;
        }
        if point_of[c] == usize::MAX && !used[p] {
            point_of[c] = p;
            used[p] = true;
            left -= 1;
        }
    }
    point_of.into_iter().filter(|&p| p != usize::MAX).collect()
}

fn clustered_select(
    name: &str,
    points: ArrayView2<'_, f64>,
    probs: &ProbabilityMatrix,
    fixed: ArrayView2<'_, f64>,
    candidate_indices: &[usize],
    k: usize,
    beta: usize,
    seed: u64,
) -> Result<ClusteredSelection> {
    let margins = score_margin(probs);
    let n_pre = beta.saturating_mul(k).min(candidate_indices.len());
    let mut preselected = top_k_positions(margins.as_slice(), candidate_indices, n_pre);
    // Candidate order keeps K-Means++ draws independent of score ties.
    preselected.sort_unstable();
    let pre_points = points.select(Axis(0), &preselected);
    let weights: Vec<f64> = preselected
        .iter()
        .map(|&p| margins.as_slice()[p].max(WEIGHT_FLOOR))
        .collect();
    let k_eff = k.min(preselected.len());
    let clustering = kmeans_fixed(
        pre_points.view(),
        &weights,
        k_eff,
        fixed,
        seed,
        DEFAULT_TOL,
        DEFAULT_MAX_ITER,
    )?;
    let chosen = extract(pre_points.view(), &clustering.moving);
    let indices = chosen
        .iter()
        .map(|&q| candidate_indices[preselected[q]])
        .collect();
    Ok(ClusteredSelection {
        selection: BatchSelection::new(indices, name),
        preselected,
        clustering,
    })
}

/// WKMeans. `points` and `probs` rows are aligned with `candidate_indices`.
pub fn wkmeans_select(
    points: ArrayView2<'_, f64>,
    probs: &ProbabilityMatrix,
    candidate_indices: &[usize],
    k: usize,
    beta: usize,
    seed: u64,
) -> Result<BatchSelection> {
    wkmeans_select_detailed(points, probs, candidate_indices, k, beta, seed).map(|c| c.selection)
}

pub fn wkmeans_select_detailed(
    points: ArrayView2<'_, f64>,
    probs: &ProbabilityMatrix,
    candidate_indices: &[usize],
    k: usize,
    beta: usize,
    seed: u64,
) -> Result<ClusteredSelection> {
    check_inputs(points, probs, candidate_indices, k, beta)?;
    let none = Array2::<f64>::zeros((0, points.ncols()));
    clustered_select("wkmeans", points, probs, none.view(), candidate_indices, k, beta, seed)
}

/// IWKMeans: like [`wkmeans_select`], with `labeled_points` as fixed centroids.
pub fn iwkmeans_select(
    points: ArrayView2<'_, f64>,
    probs: &ProbabilityMatrix,
    labeled_points: ArrayView2<'_, f64>,
    candidate_indices: &[usize],
    k: usize,
    beta: usize,
    seed: u64,
) -> Result<BatchSelection> {
    iwkmeans_select_detailed(points, probs, labeled_points, candidate_indices, k, beta, seed)
        .map(|c| c.selection)
}

pub fn iwkmeans_select_detailed(
    points: ArrayView2<'_, f64>,
    probs: &ProbabilityMatrix,
    labeled_points: ArrayView2<'_, f64>,
    candidate_indices: &[usize],
    k: usize,
    beta: usize,
    seed: u64,
) -> Result<ClusteredSelection> {
    check_inputs(points, probs, candidate_indices, k, beta)?;
    if labeled_points.nrows() == 0 {
        return Err(Error::Parameter("iwkmeans needs at least one labeled point".into()));
    }
    if labeled_points.ncols() != points.ncols() {
        return Err(Error::Shape("labeled points and candidates differ in dimension".into()));
    }
    clustered_select("iwkmeans", points, probs, labeled_points, candidate_indices, k, beta, seed)
}
