//! CART classification trees with Gini impurity, bagged into a random forest.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubsample {
    Sqrt,
    Log2,
    All,
    Count(usize),
}

impl FeatureSubsample {
    pub fn resolve(&self, n_features: usize) -> usize {
        let k = match *self {
            FeatureSubsample::Sqrt => (n_features as f64).sqrt().floor() as usize,
            FeatureSubsample::Log2 => (n_features as f64).log2().floor() as usize,
            FeatureSubsample::All => n_features,
            FeatureSubsample::Count(c) => c,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestSpec {
    pub n_trees: usize,
    /// `None` grows trees until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_features: FeatureSubsample,
    pub bootstrap: bool,
    /// Leaf one-hot columns kept before PCA when embedding.
    pub embed_max_columns: usize,
}

impl Default for ForestSpec {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 1,
            max_features: FeatureSubsample::Sqrt,
            bootstrap: true,
            embed_max_columns: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        id: usize,
        distribution: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    n_leaves: usize,
}

impl DecisionTree {
    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    fn leaf(&self, x: ArrayView1<'_, f64>) -> (usize, &[f64]) {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { id, distribution } => return (*id, distribution),
            }
        }
    }

    pub fn leaf_id(&self, x: ArrayView1<'_, f64>) -> usize {
        self.leaf(x).0
    }

    pub fn predict_distribution(&self, x: ArrayView1<'_, f64>) -> &[f64] {
        self.leaf(x).1
    }
}

struct TreeBuilder<'a, R: Rng> {
    x: ArrayView2<'a, f64>,
    y: &'a [usize],
    n_classes: usize,
    spec: &'a ForestSpec,
    max_features: usize,
    rng: R,
    nodes: Vec<Node>,
    n_leaves: usize,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

impl<R: Rng> TreeBuilder<'_, R> {
    fn make_leaf(&mut self, samples: &[usize]) -> usize {
        let mut dist = vec![0.0; self.n_classes];
        for &s in samples {
            dist[self.y[s]] += 1.0;
        }
        let n = samples.len() as f64;
        dist.iter_mut().for_each(|v| *v /= n);
        let id = self.n_leaves;
        self.n_leaves += 1;
        self.nodes.push(Node::Leaf {
            id,
            distribution: dist,
        });
        self.nodes.len() - 1
    }

    /// Best (feature, threshold) over a random feature subset. Features beyond
    /// the subset are tried only when none of the subset admits a valid split.
    fn best_split(&mut self, samples: &[usize]) -> Option<(usize, f64)> {
        let d = self.x.ncols();
        let mut features: Vec<usize> = (0..d).collect();
        features.shuffle(&mut self.rng);
        let min_leaf = self.spec.min_samples_leaf.max(1);
        let n = samples.len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = samples.to_vec();
        let mut total = vec![0usize; self.n_classes];
        for &s in samples {
            total[self.y[s]] += 1;
        }

        for (tried, &f) in features.iter().enumerate() {
            if tried >= self.max_features && best.is_some() {
                break;
            }
            sorted.sort_by(|&a, &b| {
                self.x[[a, f]]
                    .partial_cmp(&self.x[[b, f]])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            let mut left = vec![0usize; self.n_classes];
            for i in 0..n - 1 {
                left[self.y[sorted[i]]] += 1;
                let nl = i + 1;
                let nr = n - nl;
                if nl < min_leaf || nr < min_leaf {
                    continue;
                }
                let lo = self.x[[sorted[i], f]];
                let hi = self.x[[sorted[i + 1], f]];
                if lo >= hi {
                    continue;
                }
                let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
                let score = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / n as f64;
                if best.is_none_or(|(b, _, _)| score < b) {
                    let mut threshold = 0.5 * (lo + hi);
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some((score, f, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn build(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let first = self.y[samples[0]];
        let pure = samples.iter().all(|&s| self.y[s] == first);
        let depth_capped = self.spec.max_depth.is_some_and(|m| depth >= m);
        if pure || depth_capped || samples.len() < 2 * self.spec.min_samples_leaf.max(1) {
            return self.make_leaf(&samples);
        }
        let Some((feature, threshold)) = self.best_split(&samples) else {
            return self.make_leaf(&samples);
        };
        let (l, r): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&s| self.x[[s, feature]] <= threshold);
        let idx = self.nodes.len();
        self.nodes.push(Node::Split {
            feature,
            threshold,
            left: 0,
            right: 0,
        });
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[idx] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        idx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    n_classes: usize,
}

impl RandomForest {
    pub fn fit(
        spec: &ForestSpec,
        x: ArrayView2<'_, f64>,
        y: &[usize],
        n_classes: usize,
        seed: u64,
    ) -> Self {
        let n = x.nrows();
        let max_features = spec.max_features.resolve(x.ncols());
        let trees = (0..spec.n_trees.max(1))
            .into_par_iter()
            .map(|t| {
                let mut rng = rng_from_seed(derive_seed(seed, &["tree".into(), t.into()]));
                let samples: Vec<usize> = if spec.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                let mut builder = TreeBuilder {
                    x,
                    y,
                    n_classes,
                    spec,
                    max_features,
                    rng,
                    nodes: Vec::new(),
                    n_leaves: 0,
                };
                builder.build(samples, 0);
                DecisionTree {
                    nodes: builder.nodes,
                    n_leaves: builder.n_leaves,
                }
            })
            .collect();
        Self { trees, n_classes }
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn predict_proba(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = Array2::<f64>::zeros((x.nrows(), self.n_classes));
        let scale = 1.0 / self.trees.len() as f64;
        for (i, row) in x.outer_iter().enumerate() {
            for tree in &self.trees {
                for (c, p) in tree.predict_distribution(row).iter().enumerate() {
                    out[[i, c]] += p;
                }
            }
            let mut sum = 0.0;
            for c in 0..self.n_classes {
                out[[i, c]] *= scale;
                sum += out[[i, c]];
            }
            for c in 0..self.n_classes {
                out[[i, c]] /= sum;
            }
        }
        out
    }

    /// Concatenated one-hot leaf membership, one block of columns per tree.
    pub fn leaf_embedding(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let width: usize = self.trees.iter().map(|t| t.n_leaves).sum();
        let mut out = Array2::<f64>::zeros((x.nrows(), width));
        for (i, row) in x.outer_iter().enumerate() {
            let mut offset = 0;
            for tree in &self.trees {
                out[[i, offset + tree.leaf_id(row)]] = 1.0;
                offset += tree.n_leaves;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_tree_memorizes_distinct_rows() {
        let x = array![[0.0, 1.0], [1.0, 0.0], [2.0, 2.0], [3.0, 1.0], [0.5, 0.5]];
        let y = [0, 1, 0, 2, 1];
        let spec = ForestSpec {
            n_trees: 1,
            bootstrap: false,
            ..ForestSpec::default()
        };
        let forest = RandomForest::fit(&spec, x.view(), &y, 3, 0);
        let p = forest.predict_proba(x.view());
        for (i, &label) in y.iter().enumerate() {
            assert_eq!(p[[i, label]], 1.0);
        }
    }

    #[test]
    fn depth_limit_gives_mixed_leaves() {
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let y = [0, 1, 0, 1];
        let spec = ForestSpec {
            n_trees: 1,
            max_depth: Some(0),
            bootstrap: false,
            ..ForestSpec::default()
        };
        let forest = RandomForest::fit(&spec, x.view(), &y, 2, 0);
        let p = forest.predict_proba(x.view());
        assert!(p.iter().all(|&v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn min_samples_leaf_is_respected() {
        let x = array![[0.0], [1.0], [2.0], [3.0], [4.0], [5.0]];
        let y = [0, 1, 0, 1, 0, 1];
        let spec = ForestSpec {
            n_trees: 1,
            min_samples_leaf: 3,
            bootstrap: false,
            ..ForestSpec::default()
        };
        let forest = RandomForest::fit(&spec, x.view(), &y, 2, 0);
        assert!(forest.trees()[0].n_leaves() <= 2);
    }

    #[test]
    fn feature_subsample_resolution() {
        assert_eq!(FeatureSubsample::Sqrt.resolve(2), 1);
        assert_eq!(FeatureSubsample::Sqrt.resolve(40), 6);
        assert_eq!(FeatureSubsample::Log2.resolve(1), 1);
        assert_eq!(FeatureSubsample::Count(50).resolve(3), 3);
    }

    #[test]
    fn leaf_embedding_width_is_total_leaves() {
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let y = [0, 1, 0, 1];
        let spec = ForestSpec {
            n_trees: 3,
            bootstrap: false,
            ..ForestSpec::default()
        };
        let forest = RandomForest::fit(&spec, x.view(), &y, 2, 0);
        for t in forest.trees() {
            assert_eq!(t.n_leaves(), 4);
        }
        let e = forest.leaf_embedding(x.view());
        assert_eq!(e.ncols(), 12);
        for row in e.rows() {
            assert_eq!(row.sum(), 3.0);
        }
    }
}
