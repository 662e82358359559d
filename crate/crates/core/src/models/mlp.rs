//! Fully connected ReLU network with a softmax output, trained with Adam on
//! mini-batches of the cross-entropy loss.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpSpec {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
}

impl Default for MlpSpec {
    fn default() -> Self {
        Self {
            hidden: vec![128, 64],
            learning_rate: 1e-3,
            epochs: 100,
            batch_size: 32,
            l2: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Dense {
    weights: Array2<f64>,
    bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct AdamState {
    m_w: Array2<f64>,
    v_w: Array2<f64>,
    m_b: Array1<f64>,
    v_b: Array1<f64>,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
    input_mean: Array1<f64>,
    input_scale: Array1<f64>,
    n_classes: usize,
    loss_history: Vec<f64>,
}

fn relu(x: &mut Array2<f64>) {
    x.mapv_inplace(|v| v.max(0.0));
}

pub(crate) fn softmax_rows(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}

impl Mlp {
    pub fn fit(spec: &MlpSpec, x: ArrayView2<'_, f64>, y: &[usize], n_classes: usize, seed: u64) -> Self {
        let (n, d) = x.dim();
        let input_mean = x.mean_axis(Axis(0)).expect("non-empty training set");
        let input_scale = x.std_axis(Axis(0), 0.0).mapv(|s| if s > 1e-12 { s } else { 1.0 });

        let mut init_rng = rng_from_seed(derive_seed(seed, &["mlp-init".into()]));
        let mut sizes = vec![d];
        sizes.extend(spec.hidden.iter().copied());
        sizes.push(n_classes);
        let layers: Vec<Dense> = sizes
            .windows(2)
            .map(|w| {
                let std = (2.0 / w[0] as f64).sqrt();
                let weights = Array2::from_shape_fn((w[0], w[1]), |_| {
                    let z: f64 = StandardNormal.sample(&mut init_rng);
                    z * std
                });
                Dense {
                    weights,
                    bias: Array1::zeros(w[1]),
                }
            })
            .collect();

        let mut model = Mlp {
            layers,
            input_mean,
            input_scale,
            n_classes,
            loss_history: Vec::with_capacity(spec.epochs),
        };
        let xs = model.standardize(x);
        let mut targets = Array2::<f64>::zeros((n, n_classes));
        for (i, &c) in y.iter().enumerate() {
            targets[[i, c]] = 1.0;
        }

        let mut adam: Vec<AdamState> = model
            .layers
            .iter()
            .map(|l| AdamState {
                m_w: Array2::zeros(l.weights.raw_dim()),
                v_w: Array2::zeros(l.weights.raw_dim()),
                m_b: Array1::zeros(l.bias.len()),
                v_b: Array1::zeros(l.bias.len()),
            })
            .collect();

        let mut shuffle_rng = rng_from_seed(derive_seed(seed, &["mlp-batches".into()]));
        let mut order: Vec<usize> = (0..n).collect();
        let batch = spec.batch_size.clamp(1, n.max(1));
        let mut step = 0i32;
        for _ in 0..spec.epochs {
            order.shuffle(&mut shuffle_rng);
            for chunk in order.chunks(batch) {
                step += 1;
                let xb = xs.select(Axis(0), chunk);
                let tb = targets.select(Axis(0), chunk);
                model.adam_step(spec, &mut adam, xb, tb, step);
            }
            let loss = model.loss_standardized(xs.view(), &targets);
            model.loss_history.push(loss);
        }
        model
    }

    fn standardize(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        (&x - &self.input_mean.view().insert_axis(Axis(0)))
            / &self.input_scale.view().insert_axis(Axis(0))
    }

    /// Activations of every layer, input included; the last entry holds probabilities.
    fn forward(&self, xs: Array2<f64>) -> Vec<Array2<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(xs);
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = acts[i].dot(&layer.weights) + &layer.bias.view().insert_axis(Axis(0));
            if i < last {
                relu(&mut z);
            } else {
                softmax_rows(&mut z);
            }
            acts.push(z);
        }
        acts
    }

    fn adam_step(
        &mut self,
        spec: &MlpSpec,
        adam: &mut [AdamState],
        xb: Array2<f64>,
        tb: Array2<f64>,
        step: i32,
    ) {
        let m = xb.nrows() as f64;
        let acts = self.forward(xb);
        let mut delta = (acts.last().unwrap() - &tb) / m;
        let bc1 = 1.0 - BETA1.powi(step);
        let bc2 = 1.0 - BETA2.powi(step);
        for l in (0..self.layers.len()).rev() {
            let mut grad_w = acts[l].t().dot(&delta);
            if spec.l2 > 0.0 {
                grad_w.scaled_add(spec.l2, &self.layers[l].weights);
            }
            let grad_b = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut back = delta.dot(&self.layers[l].weights.t());
                back.zip_mut_with(&acts[l], |g, &a| {
                    if a <= 0.0 {
                        *g = 0.0;
                    }
                });
                delta = back;
            }
            let state = &mut adam[l];
            let layer = &mut self.layers[l];
            state.m_w.zip_mut_with(&grad_w, |mv, &g| *mv = BETA1 * *mv + (1.0 - BETA1) * g);
            state.v_w.zip_mut_with(&grad_w, |vv, &g| *vv = BETA2 * *vv + (1.0 - BETA2) * g * g);
            state.m_b.zip_mut_with(&grad_b, |mv, &g| *mv = BETA1 * *mv + (1.0 - BETA1) * g);
            state.v_b.zip_mut_with(&grad_b, |vv, &g| *vv = BETA2 * *vv + (1.0 - BETA2) * g * g);
            let lr = spec.learning_rate;
            ndarray::Zip::from(&mut layer.weights)
                .and(&state.m_w)
                .and(&state.v_w)
                .for_each(|w, &mv, &vv| *w -= lr * (mv / bc1) / ((vv / bc2).sqrt() + ADAM_EPS));
            ndarray::Zip::from(&mut layer.bias)
                .and(&state.m_b)
                .and(&state.v_b)
                .for_each(|b, &mv, &vv| *b -= lr * (mv / bc1) / ((vv / bc2).sqrt() + ADAM_EPS));
        }
    }

    fn loss_standardized(&self, xs: ArrayView2<'_, f64>, targets: &Array2<f64>) -> f64 {
        let probs = self.forward(xs.to_owned()).pop().unwrap();
        let n = probs.nrows() as f64;
        -(&probs.mapv(|p| p.max(1e-300).ln()) * targets).sum() / n
    }

    /// Mean training cross-entropy after each epoch.
    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    pub fn predict_proba(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        self.forward(self.standardize(x)).pop().unwrap()
    }

    /// Activations of the last hidden layer.
    pub fn penultimate(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut acts = self.forward(self.standardize(x));
        acts.swap_remove(acts.len() - 2)
    }

    pub fn penultimate_dim(&self) -> usize {
        self.layers.last().unwrap().weights.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Zeroes the output layer; predictions become uniform.
    pub fn zero_output_layer(&mut self) {
        let last = self.layers.last_mut().unwrap();
        last.weights.fill(0.0);
        last.bias.fill(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn xor_like() -> (Array2<f64>, Vec<usize>) {
        let x = array![
            [0.0, 0.0],
            [0.1, 0.0],
            [1.0, 1.0],
            [0.9, 1.0],
            [0.0, 1.0],
            [0.1, 0.9],
            [1.0, 0.0],
            [1.0, 0.1]
        ];
        (x, vec![0, 0, 0, 0, 1, 1, 1, 1])
    }

    #[test]
    fn learns_xor() {
        let (x, y) = xor_like();
        let spec = MlpSpec {
            epochs: 300,
            learning_rate: 1e-2,
            ..MlpSpec::default()
        };
        let mlp = Mlp::fit(&spec, x.view(), &y, 2, 1);
        let p = mlp.predict_proba(x.view());
        for (i, &label) in y.iter().enumerate() {
            assert!(p[[i, label]] > 0.5, "row {i}: {:?}", p.row(i));
        }
    }

    #[test]
    fn zeroed_output_layer_is_uniform() {
        let (x, y) = xor_like();
        let spec = MlpSpec {
            epochs: 2,
            ..MlpSpec::default()
        };
        let mut mlp = Mlp::fit(&spec, x.view(), &y, 4, 1);
        mlp.zero_output_layer();
        let p = mlp.predict_proba(x.view());
        assert!(p.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn penultimate_dimension_matches_last_hidden_layer() {
        let (x, y) = xor_like();
        let spec = MlpSpec {
            epochs: 1,
            ..MlpSpec::default()
        };
        let mlp = Mlp::fit(&spec, x.view(), &y, 2, 1);
        assert_eq!(mlp.penultimate_dim(), 64);
        let e = mlp.penultimate(x.view());
        assert_eq!(e.dim(), (8, 64));
        assert!(e.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn loss_history_has_one_entry_per_epoch() {
        let (x, y) = xor_like();
        let spec = MlpSpec {
            epochs: 7,
            ..MlpSpec::default()
        };
        let mlp = Mlp::fit(&spec, x.view(), &y, 2, 1);
        assert_eq!(mlp.loss_history().len(), 7);
    }
}
