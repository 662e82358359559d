use ndarray::{ArrayView1, ArrayView2};

use crate::error::{Error, Result};

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Greedy k-center: repeatedly take the candidate farthest from everything
/// labeled or already taken. Rows refer to `embedding`; ties go to the
/// smaller row. Returns the chosen candidate rows in selection order.
pub fn kcenter_greedy(
    embedding: ArrayView2<'_, f64>,
    labeled_rows: &[usize],
    candidate_rows: &[usize],
    k: usize,
) -> Result<Vec<usize>> {
    if candidate_rows.is_empty() {
        return Err(Error::Selection("empty candidate set".into()));
    }
    if labeled_rows.is_empty() {
        return Err(Error::Parameter("kcenter needs at least one labeled row".into()));
    }
    let n = embedding.nrows();
    if let Some(&bad) = labeled_rows.iter().chain(candidate_rows).find(|&&r| r >= n) {
        return Err(Error::Shape(format!("row {bad} outside a {n}-row embedding")));
    }

    let mut min_dist: Vec<f64> = candidate_rows
        .iter()
        .map(|&c| {
            labeled_rows
                .iter()
                .map(|&l| sq_dist(embedding.row(c), embedding.row(l)))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut taken = vec![false; candidate_rows.len()];
    let mut selected = Vec::with_capacity(k.min(candidate_rows.len()));
    for _ in 0..k.min(candidate_rows.len()) {
        let mut best: Option<usize> = None;
        for (p, &d) in min_dist.iter().enumerate() {
            if taken[p] {
                continue;
            }
            best = match best {
                None => Some(p),
                Some(b) if d > min_dist[b] || (d == min_dist[b] && candidate_rows[p] < candidate_rows[b]) => {
                    Some(p)
                }
                keep => keep,
            };
        }
        let b = best.expect("untaken candidate exists");
        taken[b] = true;
        let chosen = candidate_rows[b];
        selected.push(chosen);
        for (p, &c) in candidate_rows.iter().enumerate() {
            if !taken[p] {
                min_dist[p] = min_dist[p].min(sq_dist(embedding.row(c), embedding.row(chosen)));
            }
        }
    }
    Ok(selected)
}
