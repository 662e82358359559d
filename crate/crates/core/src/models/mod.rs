//! Probabilistic classifiers, embeddings and PCA.

mod forest;
mod mlp;
mod pca;

pub use forest::{DecisionTree, FeatureSubsample, ForestSpec, RandomForest};
pub use mlp::{Mlp, MlpSpec};
pub use pca::{pca, Pca};

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Model family and hyperparameters. Seeds are supplied at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Mlp(MlpSpec),
    RandomForest(ForestSpec),
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        ClassifierSpec::RandomForest(ForestSpec::default())
    }
}

impl ClassifierSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ClassifierSpec::Mlp(m) => {
                if m.hidden.is_empty() || m.hidden.contains(&0) {
                    return Err(Error::Config("classifier.hidden: sizes must be positive".into()));
                }
                if !(m.learning_rate > 0.0 && m.learning_rate.is_finite()) {
                    return Err(Error::Config("classifier.learning_rate: must be positive".into()));
                }
                if m.batch_size == 0 {
                    return Err(Error::Config("classifier.batch_size: must be positive".into()));
                }
            }
            ClassifierSpec::RandomForest(f) => {
                if f.n_trees == 0 {
                    return Err(Error::Config("classifier.n_trees: must be >= 1".into()));
                }
                if f.min_samples_leaf == 0 {
                    return Err(Error::Config("classifier.min_samples_leaf: must be >= 1".into()));
                }
                if f.embed_max_columns == 0 {
                    return Err(Error::Config("classifier.embed_max_columns: must be >= 1".into()));
                }
            }
        }
        Ok(())
    }
}

const ROW_SUM_TOL: f64 = 1e-9;

/// Row-stochastic class probabilities, one row per queried sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix(Array2<f64>);

impl ProbabilityMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        for (i, row) in values.outer_iter().enumerate() {
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::Shape(format!("row {i} has an entry outside [0, 1]")));
            }
            let s = row.sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Shape(format!("row {i} sums to {s}")));
            }
        }
        Ok(Self(values))
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.0.row(i)
    }

    pub fn n_rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.0.ncols()
    }

    pub fn argmax(&self, i: usize) -> usize {
        let row = self.0.row(i);
        let mut best = 0;
        for (c, &p) in row.iter().enumerate() {
            if p > row[best] {
                best = c;
            }
        }
        best
    }

    /// Largest and second largest entry of row `i`.
    pub fn top2(&self, i: usize) -> (f64, f64) {
        let mut first = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        for &p in self.0.row(i) {
            if p > first {
                second = first;
                first = p;
            } else if p > second {
                second = p;
            }
        }
        (first, second.max(0.0))
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self(self.0.select(Axis(0), rows))
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub values: Array2<f64>,
    /// Width before PCA.
    pub raw_dim: usize,
    pub requested_dim: usize,
    /// Set when `requested_dim` exceeded what the data supports.
    pub clamped: bool,
    pub degenerate: bool,
}

impl EmbeddingMatrix {
    pub fn dim(&self) -> usize {
        self.values.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Fitted {
    Mlp(Mlp),
    Forest(RandomForest),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    fitted: Fitted,
    n_classes: usize,
    n_features: usize,
    spec: ClassifierSpec,
    seed: u64,
}

pub fn fit(
    spec: &ClassifierSpec,
    x: ArrayView2<'_, f64>,
    y: &[usize],
    n_classes: usize,
    seed: u64,
) -> Result<TrainedModel> {
    spec.validate()?;
    if x.nrows() != y.len() {
        return Err(Error::Shape(format!("{} rows for {} labels", x.nrows(), y.len())));
    }
    if y.is_empty() {
        return Err(Error::Fit("empty training set".into()));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::Fit(format!("label {bad} out of range for {n_classes} classes")));
    }
    if y.iter().all(|&c| c == y[0]) {
        return Err(Error::Fit(format!(
            "training set holds a single class ({}); probabilities are undefined",
            y[0]
        )));
    }
    let fitted = match spec {
        ClassifierSpec::Mlp(m) => Fitted::Mlp(Mlp::fit(m, x, y, n_classes, seed)),
        ClassifierSpec::RandomForest(f) => {
            Fitted::Forest(RandomForest::fit(f, x, y, n_classes, seed))
        }
    };
    Ok(TrainedModel {
        fitted,
        n_classes,
        n_features: x.ncols(),
        spec: spec.clone(),
        seed,
    })
}

impl TrainedModel {
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn as_mlp(&self) -> Option<&Mlp> {
        match &self.fitted {
            Fitted::Mlp(m) => Some(m),
            Fitted::Forest(_) => None,
        }
    }

    pub fn as_mlp_mut(&mut self) -> Option<&mut Mlp> {
        match &mut self.fitted {
            Fitted::Mlp(m) => Some(m),
            Fitted::Forest(_) => None,
        }
    }

    pub fn as_forest(&self) -> Option<&RandomForest> {
        match &self.fitted {
            Fitted::Forest(f) => Some(f),
            Fitted::Mlp(_) => None,
        }
    }

    fn check_dim(&self, x: ArrayView2<'_, f64>) -> Result<()> {
        if x.ncols() != self.n_features {
            return Err(Error::Shape(format!(
                "model expects {} features, got {}",
                self.n_features,
                x.ncols()
            )));
        }
        Ok(())
    }

    pub fn predict_proba(&self, x: ArrayView2<'_, f64>) -> Result<ProbabilityMatrix> {
        self.check_dim(x)?;
        let raw = match &self.fitted {
            Fitted::Mlp(m) => m.predict_proba(x),
            Fitted::Forest(f) => f.predict_proba(x),
        };
        ProbabilityMatrix::new(raw)
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        let p = self.predict_proba(x)?;
        Ok((0..p.n_rows()).map(|i| p.argmax(i)).collect())
    }

    /// Forest: concatenated leaf one-hots reduced by PCA. MLP: penultimate
    /// activations, reduced by PCA only when `target_dim` is smaller.
    /// PCA is fitted on `x` itself.
    pub fn embed(&self, x: ArrayView2<'_, f64>, target_dim: usize) -> Result<EmbeddingMatrix> {
        self.check_dim(x)?;
        if target_dim == 0 {
            return Err(Error::Parameter("target_dim must be positive".into()));
        }
        let (raw, always_reduce) = match &self.fitted {
            Fitted::Forest(f) => {
                let mut raw = f.leaf_embedding(x);
                let max_cols = match &self.spec {
                    ClassifierSpec::RandomForest(s) => s.embed_max_columns,
                    ClassifierSpec::Mlp(_) => unreachable!(),
                };
                if raw.ncols() > max_cols {
                    let mut rng = rng_from_seed(derive_seed(self.seed, &["embed-columns".into()]));
                    let mut cols = sample(&mut rng, raw.ncols(), max_cols).into_vec();
                    cols.sort_unstable();
                    raw = raw.select(Axis(1), &cols);
                }
                (raw, true)
            }
            Fitted::Mlp(m) => (m.penultimate(x), false),
        };
        let raw_dim = raw.ncols();
        if !always_reduce && target_dim >= raw_dim {
            return Ok(EmbeddingMatrix {
                values: raw,
                raw_dim,
                requested_dim: target_dim,
                clamped: target_dim > raw_dim,
                degenerate: false,
            });
        }
        let max_dim = raw.nrows().min(raw_dim);
        let effective = target_dim.min(max_dim);
        if effective == 0 {
            return Err(Error::Shape("cannot embed an empty matrix".into()));
        }
        let (model, projected) = pca(raw.view(), effective)?;
        Ok(EmbeddingMatrix {
            values: projected,
            raw_dim,
            requested_dim: target_dim,
            clamped: effective < target_dim,
            degenerate: model.degenerate,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn two_gaussians(n: usize, seed: u64) -> (Array2<f64>, Vec<usize>) {
        let mut rng = rng_from_seed(seed);
        let mut x = Array2::zeros((n, 1));
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let c = i % 2;
            let mean = if c == 0 { -3.0 } else { 3.0 };
            x[[i, 0]] = Normal::new(mean, 1.0).unwrap().sample(&mut rng);
            y.push(c);
        }
        (x, y)
    }

    fn fast_mlp() -> ClassifierSpec {
        ClassifierSpec::Mlp(MlpSpec {
            hidden: vec![16, 8],
            epochs: 50,
            learning_rate: 1e-2,
            ..MlpSpec::default()
        })
    }

    fn accuracy(pred: &[usize], y: &[usize]) -> f64 {
        pred.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
    }

    #[test]
    fn separated_gaussians_are_learned() {
        let (x, y) = two_gaussians(100, 2);
        // Bayes rule for equal-variance, equal-prior classes: threshold at the midpoint 0.
        let bayes: Vec<usize> = x.column(0).iter().map(|&v| usize::from(v > 0.0)).collect();
        let bayes_acc = accuracy(&bayes, &y);
        assert!(bayes_acc >= 0.95);
        for spec in [ClassifierSpec::default(), fast_mlp()] {
            let model = fit(&spec, x.view(), &y, 2, 0).unwrap();
            let acc = accuracy(&model.predict(x.view()).unwrap(), &y);
            assert!(acc >= 0.95, "{spec:?}: {acc}");
        }
    }

    #[test]
    fn fitting_is_bit_deterministic() {
        let (x, y) = two_gaussians(60, 3);
        let probe = array![[-0.2], [0.1], [2.0]];
        for spec in [ClassifierSpec::default(), fast_mlp()] {
            let a = fit(&spec, x.view(), &y, 2, 9).unwrap().predict_proba(probe.view()).unwrap();
            let b = fit(&spec, x.view(), &y, 2, 9).unwrap().predict_proba(probe.view()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn single_class_is_a_fit_error() {
        let x = array![[0.0], [1.0]];
        assert!(matches!(
            fit(&ClassifierSpec::default(), x.view(), &[1, 1], 2, 0),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn dimension_mismatch_is_a_shape_error() {
        let (x, y) = two_gaussians(20, 4);
        let model = fit(&ClassifierSpec::default(), x.view(), &y, 2, 0).unwrap();
        let wrong = array![[0.0, 1.0]];
        assert!(matches!(model.predict_proba(wrong.view()), Err(Error::Shape(_))));
    }

    #[test]
    fn pure_region_gets_probability_one() {
        let (x, y) = two_gaussians(40, 5);
        let model = fit(&ClassifierSpec::default(), x.view(), &y, 2, 0).unwrap();
        let p = model.predict_proba(array![[-10.0], [10.0]].view()).unwrap();
        assert_eq!(p.row(0)[0], 1.0);
        assert_eq!(p.row(1)[1], 1.0);
    }

    #[test]
    fn zeroed_mlp_predicts_uniform_rows() {
        let (x, y) = two_gaussians(20, 6);
        let mut model = fit(&fast_mlp(), x.view(), &y, 2, 0).unwrap();
        model.as_mlp_mut().unwrap().zero_output_layer();
        let p = model.predict_proba(x.view()).unwrap();
        assert!(p.view().iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn absent_classes_get_columns() {
        let x = array![[0.0], [1.0], [2.0]];
        let model = fit(&ClassifierSpec::default(), x.view(), &[0, 2, 0], 4, 0).unwrap();
        let p = model.predict_proba(x.view()).unwrap();
        assert_eq!(p.n_classes(), 4);
        assert_eq!(p.view().column(1).sum(), 0.0);
    }

    #[test]
    fn forest_embedding_is_reduced_and_clamped() {
        let (x, y) = two_gaussians(30, 7);
        let spec = ClassifierSpec::RandomForest(ForestSpec {
            n_trees: 3,
            ..ForestSpec::default()
        });
        let model = fit(&spec, x.view(), &y, 2, 0).unwrap();
        let raw_width: usize = model.as_forest().unwrap().trees().iter().map(|t| t.n_leaves()).sum();
        let e = model.embed(x.view(), 2).unwrap();
        assert_eq!(e.raw_dim, raw_width);
        assert_eq!(e.dim(), 2);
        let e = model.embed(x.view(), 10_000).unwrap();
        assert!(e.clamped);
        assert!(e.dim() <= 30);
    }

    #[test]
    fn forest_embedding_column_cap() {
        let (x, y) = two_gaussians(60, 8);
        let spec = ClassifierSpec::RandomForest(ForestSpec {
            n_trees: 20,
            embed_max_columns: 25,
            ..ForestSpec::default()
        });
        let model = fit(&spec, x.view(), &y, 2, 0).unwrap();
        let e = model.embed(x.view(), 4).unwrap();
        assert_eq!(e.raw_dim, 25);
        assert_eq!(e.dim(), 4);
    }

    #[test]
    fn mlp_embedding_uses_penultimate_layer() {
        let (x, y) = two_gaussians(40, 9);
        let spec = ClassifierSpec::Mlp(MlpSpec {
            epochs: 2,
            ..MlpSpec::default()
        });
        let model = fit(&spec, x.view(), &y, 2, 0).unwrap();
        let full = model.embed(x.view(), 64).unwrap();
        assert_eq!(full.dim(), 64);
        assert!(!full.clamped);
        let reduced = model.embed(x.view(), 8).unwrap();
        assert_eq!(reduced.dim(), 8);
    }

    #[test]
    fn probability_matrix_validates_rows() {
        assert!(ProbabilityMatrix::new(array![[0.5, 0.6]]).is_err());
        assert!(ProbabilityMatrix::new(array![[1.2, -0.2]]).is_err());
        let p = ProbabilityMatrix::new(array![[0.6, 0.3, 0.1]]).unwrap();
        assert_eq!(p.top2(0), (0.6, 0.3));
        assert_eq!(p.argmax(0), 0);
    }

    #[test]
    fn forest_training_accuracy_is_perfect_without_duplicates() {
        let mut rng = rng_from_seed(10);
        let x = Array2::from_shape_fn((150, 3), |_| rng.random_range(-1.0..1.0));
        let y: Vec<usize> = (0..150).map(|_| rng.random_range(0..3)).collect();
        let model = fit(&ClassifierSpec::default(), x.view(), &y, 3, 1).unwrap();
        assert_eq!(accuracy(&model.predict(x.view()).unwrap(), &y), 1.0);
    }
}
