//! Principal component analysis by symmetric eigendecomposition.
//!
//! The covariance matrix is decomposed when there are at least as many samples
//! as dimensions; otherwise the Gram matrix of the centered samples is used,
//! which has the same non-zero spectrum and is smaller.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

const ZERO_VARIANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Array1<f64>,
    /// One unit-norm component per row, ordered by decreasing variance.
    pub components: Array2<f64>,
    pub explained_variance: Vec<f64>,
    /// Set when the input carries no variance at all.
    pub degenerate: bool,
}

impl Pca {
    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        if self.degenerate {
            return Array2::zeros((x.nrows(), self.components.nrows()));
        }
        let centered = &x - &self.mean.view().insert_axis(Axis(0));
        centered.dot(&self.components.t())
    }
}

/// Fits PCA and returns it together with the projected input.
pub fn pca(x: ArrayView2<'_, f64>, target_dim: usize) -> Result<(Pca, Array2<f64>)> {
    let (n, d) = x.dim();
    if target_dim == 0 || target_dim > n.min(d) {
        return Err(Error::Parameter(format!(
            "target_dim {target_dim} must be in 1..={} for a {n}x{d} matrix",
            n.min(d)
        )));
    }
    let mean = x.mean_axis(Axis(0)).expect("non-empty");
    let centered = &x - &mean.view().insert_axis(Axis(0));
    let denom = (n.max(2) - 1) as f64;

    let (values, mut vectors) = if d <= n {
        let cov = centered.t().dot(&centered) / denom;
        let (vals, vecs) = sorted_eigen(&cov);
        (vals, vecs)
    } else {
        let gram = centered.dot(&centered.t()) / denom;
        let (vals, u) = sorted_eigen(&gram);
        // v = X^T u / |X^T u| for each non-null direction.
        let mut vecs = Array2::<f64>::zeros((d, vals.len().min(d)));
        for (j, &lambda) in vals.iter().enumerate().take(vecs.ncols()) {
            if lambda <= ZERO_VARIANCE {
                continue;
            }
            let v = centered.t().dot(&u.column(j));
            let norm = v.dot(&v).sqrt();
            if norm > 0.0 {
                vecs.column_mut(j).assign(&(v / norm));
            }
        }
        (vals, vecs)
    };

    let total: f64 = values.iter().map(|v| v.max(0.0)).sum();
    let degenerate = total <= ZERO_VARIANCE;

    complete_orthonormal(&mut vectors, target_dim, &values);
    let mut components = Array2::<f64>::zeros((target_dim, d));
    for j in 0..target_dim {
        let mut c = vectors.column(j).to_owned();
        // Sign convention: the largest-magnitude coordinate is positive.
        let mut best = 0;
        for (i, v) in c.iter().enumerate() {
            if v.abs() > c[best].abs() + 1e-12 {
                best = i;
            }
        }
        if c[best] < 0.0 {
            c.mapv_inplace(|v| -v);
        }
        components.row_mut(j).assign(&c);
    }
    let explained_variance = values.iter().take(target_dim).map(|v| v.max(0.0)).collect();
    let model = Pca {
        mean,
        components,
        explained_variance,
        degenerate,
    };
    let projected = model.transform(x);
    Ok((model, projected))
}

/// Eigenpairs sorted by decreasing eigenvalue; eigenvectors are columns.
fn sorted_eigen(m: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let k = m.nrows();
    let dm = DMatrix::from_fn(k, k, |i, j| m[[i, j]]);
    let eig = SymmetricEigen::new(dm);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Array2::from_shape_fn((k, k), |(i, j)| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Replaces null columns among the first `target` by unit vectors orthogonal
/// to the others (Gram-Schmidt against the standard basis).
fn complete_orthonormal(vectors: &mut Array2<f64>, target: usize, values: &[f64]) {
    let d = vectors.nrows();
    if vectors.ncols() < target {
        let mut grown = Array2::<f64>::zeros((d, target));
        grown
            .slice_mut(ndarray::s![.., ..vectors.ncols()])
            .assign(vectors);
        *vectors = grown;
    }
    let mut basis = 0usize;
    for j in 0..target {
        let null = values.get(j).is_none_or(|&v| v <= ZERO_VARIANCE);
        let norm = vectors.column(j).dot(&vectors.column(j)).sqrt();
        if !null && (norm - 1.0).abs() < 1e-6 {
            continue;
        }
        while basis < d {
            let mut v = Array1::<f64>::zeros(d);
            v[basis] = 1.0;
            basis += 1;
            for q in 0..target {
                if q == j {
                    continue;
                }
                let col = vectors.column(q);
                let qn = col.dot(&col);
                if qn > 0.5 {
                    let p = col.dot(&v);
                    v.scaled_add(-p, &col);
                }
            }
            let vn = v.dot(&v).sqrt();
            if vn > 1e-6 {
                vectors.column_mut(j).assign(&(v / vn));
                break;
            }
        }
    }
}
