//! Weighted K-Means where part of the centroids are fixed.
//!
//! Fixed centroids take part in every assignment step but never move, so
//! points close to them stop dragging moving centroids their way. With no
//! fixed centroids this is plain weighted Lloyd with K-Means++ seeding.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_MAX_ITER: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct FixedKMeansResult {
    pub moving: Array2<f64>,
    /// Echo of the input fixed centroids.
    pub fixed: Array2<f64>,
    /// Index into the joint list: `0..k` are moving centroids, `k..k+m` fixed ones.
    pub assignment: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after the initial assignment, then after every Lloyd iteration.
    pub inertia_history: Vec<f64>,
    /// Number of times an empty moving centroid was re-seeded.
    pub empty_repairs: usize,
    /// Set when there were fewer points than moving centroids.
    pub degenerate: bool,
}

impl FixedKMeansResult {
    pub fn n_moving(&self) -> usize {
        self.moving.nrows()
    }

    pub fn centroid(&self, joint: usize) -> ArrayView1<'_, f64> {
        if joint < self.moving.nrows() {
            self.moving.row(joint)
        } else {
            self.fixed.row(joint - self.moving.nrows())
        }
    }
}

pub(crate) fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn validate(points: ArrayView2<'_, f64>, weights: &[f64], fixed: ArrayView2<'_, f64>) -> Result<()> {
    if weights.len() != points.nrows() {
        return Err(Error::Shape(format!(
            "{} weights for {} points",
            weights.len(),
            points.nrows()
        )));
    }
    if fixed.nrows() > 0 && fixed.ncols() != points.ncols() {
        return Err(Error::Shape(format!(
            "fixed centroids have {} dims, points {}",
            fixed.ncols(),
            points.ncols()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::Parameter("weights must be finite and non-negative".into()));
    }
    if points.nrows() > 0 && weights.iter().all(|&w| w == 0.0) {
        return Err(Error::Parameter("weights are all zero".into()));
    }
    Ok(())
}

/// Weighted K-Means++ seeding over `points`: the first centroid is drawn with
/// probability proportional to weight, the next ones proportional to weight
/// times squared distance to the nearest centroid chosen so far.
pub fn kmeans_plus_plus(
    points: ArrayView2<'_, f64>,
    weights: &[f64],
    k: usize,
    rng: &mut impl Rng,
) -> Array2<f64> {
    let n = points.nrows();
    let mut centers = Array2::<f64>::zeros((k, points.ncols()));
    let mut chosen = vec![false; n];
    let mut d2 = vec![f64::INFINITY; n];
    for c in 0..k {
        let mass: Vec<f64> = (0..n)
            .map(|i| if c == 0 { weights[i] } else { weights[i] * d2[i] })
            .collect();
        let total: f64 = mass.iter().sum();
        let pick = if total > 0.0 && total.is_finite() {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &m) in mass.iter().enumerate() {
                acc += m;
                if m > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` above the last partial sum.
            pick.unwrap_or_else(|| mass.iter().rposition(|&m| m > 0.0).unwrap())
        } else {
            (0..n).find(|&i| !chosen[i]).unwrap_or(0)
        };
        chosen[pick] = true;
        centers.row_mut(c).assign(&points.row(pick));
        for i in 0..n {
            d2[i] = d2[i].min(sq_dist(points.row(i), points.row(pick)));
        }
    }
    centers
}

/// K-Means++ seeding from `seed`, then [`kmeans_fixed_from`].
pub fn kmeans_fixed(
    points: ArrayView2<'_, f64>,
    weights: &[f64],
    k_moving: usize,
    fixed_centers: ArrayView2<'_, f64>,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<FixedKMeansResult> {
    validate(points, weights, fixed_centers)?;
    if k_moving == 0 {
        return Err(Error::Parameter("k_moving must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter("tol must be positive".into()));
    }
    let n = points.nrows();
    if n < k_moving {
        return Ok(degenerate(points, weights, fixed_centers));
    }
    let mut rng = rng_from_seed(seed);
    let init = kmeans_plus_plus(points, weights, k_moving, &mut rng);
    kmeans_fixed_from(points, weights, init, fixed_centers, tol, max_iter)
}

fn degenerate(points: ArrayView2<'_, f64>, weights: &[f64], fixed: ArrayView2<'_, f64>) -> FixedKMeansResult {
    let moving = points.to_owned();
    let n = moving.nrows();
    let mut result = FixedKMeansResult {
        moving,
        fixed: fixed.to_owned(),
        assignment: vec![0; n],
        inertia: 0.0,
        iterations: 0,
        inertia_history: Vec::new(),
        empty_repairs: 0,
        degenerate: true,
    };
    let inertia = assign(points, weights, &mut result);
    result.inertia = inertia;
    result.inertia_history.push(inertia);
    result
}

/// Nearest joint centroid for every point; returns the weighted inertia.
/// Ties go to the lower joint index, so moving centroids win over fixed ones.
fn assign(points: ArrayView2<'_, f64>, weights: &[f64], state: &mut FixedKMeansResult) -> f64 {
    let k = state.moving.nrows();
    let m = state.fixed.nrows();
    let mut inertia = 0.0;
    for (i, p) in points.outer_iter().enumerate() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for j in 0..k + m {
            let c = if j < k {
                state.moving.row(j)
            } else {
                state.fixed.row(j - k)
            };
            let d = sq_dist(p, c);
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        state.assignment[i] = best;
        inertia += weights[i] * best_d;
    }
    inertia
}

/// Re-seeds every empty moving centroid onto the point with the largest
/// weighted squared distance to its centroid (lowest index on ties), then
/// reassigns. Returns the inertia after repair.
fn repair_empty(points: ArrayView2<'_, f64>, weights: &[f64], state: &mut FixedKMeansResult, mut inertia: f64) -> f64 {
    let k = state.moving.nrows();
    for _ in 0..k {
        let mut occupied = vec![false; k];
        for &a in &state.assignment {
            if a < k {
                occupied[a] = true;
            }
        }
        let empty: Vec<usize> = (0..k).filter(|&c| !occupied[c]).collect();
        if empty.is_empty() {
            break;
        }
        let mut used = vec![false; points.nrows()];
        let mut moved = false;
        for c in empty {
            let mut best: Option<(usize, f64)> = None;
            for (i, p) in points.outer_iter().enumerate() {
                if used[i] {
                    continue;
                }
                let cost = weights[i] * sq_dist(p, state.centroid(state.assignment[i]));
                if cost > 0.0 && best.is_none_or(|(_, b)| cost > b) {
                    best = Some((i, cost));
                }
            }
            let Some((i, _)) = best else { break };
            used[i] = true;
            state.moving.row_mut(c).assign(&points.row(i));
            state.empty_repairs += 1;
            moved = true;
        }
        if !moved {
            break;
        }
        inertia = assign(points, weights, state);
    }
    inertia
}

/// Lloyd iterations from explicit initial moving centroids.
pub fn kmeans_fixed_from(
    points: ArrayView2<'_, f64>,
    weights: &[f64],
    initial_moving: Array2<f64>,
    fixed_centers: ArrayView2<'_, f64>,
    tol: f64,
    max_iter: usize,
) -> Result<FixedKMeansResult> {
    validate(points, weights, fixed_centers)?;
    if initial_moving.nrows() == 0 {
        return Err(Error::Parameter("at least one moving centroid is required".into()));
    }
    if initial_moving.ncols() != points.ncols() {
        return Err(Error::Shape("initial centroids and points differ in dimension".into()));
    }
    let n = points.nrows();
    let k = initial_moving.nrows();
    let d = points.ncols();
    let mut state = FixedKMeansResult {
        moving: initial_moving,
        fixed: if fixed_centers.nrows() == 0 {
            Array2::zeros((0, d))
        } else {
            fixed_centers.to_owned()
        },
        assignment: vec![0; n],
        inertia: 0.0,
        iterations: 0,
        inertia_history: Vec::new(),
        empty_repairs: 0,
        degenerate: false,
    };
    let mut inertia = assign(points, weights, &mut state);
    inertia = repair_empty(points, weights, &mut state, inertia);
    state.inertia_history.push(inertia);

    for _ in 0..max_iter {
        let previous = (state.moving.clone(), state.assignment.clone(), state.empty_repairs);
        let mut sums = Array2::<f64>::zeros((k, d));
        let mut mass = vec![0.0; k];
        for (i, p) in points.outer_iter().enumerate() {
            let a = state.assignment[i];
            if a < k {
                sums.row_mut(a).scaled_add(weights[i], &p);
                mass[a] += weights[i];
            }
        }
        for c in 0..k {
            if mass[c] > 0.0 {
                let mean = &sums.row(c) / mass[c];
                state.moving.row_mut(c).assign(&mean);
            }
        }
        let mut next = assign(points, weights, &mut state);
        next = repair_empty(points, weights, &mut state, next);
        if next > inertia {
            // The mean step is exact in real arithmetic, so an increase is
            // rounding at a fixed point: keep the previous state and stop.
            (state.moving, state.assignment, state.empty_repairs) = previous;
            break;
        }
        state.iterations += 1;
        state.inertia_history.push(next);
        let improvement = if inertia > 0.0 {
            (inertia - next) / inertia
        } else {
            0.0
        };
        inertia = next;
        if improvement < tol {
            break;
        }
    }
    state.inertia = inertia;
    Ok(state)
}
