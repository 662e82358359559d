use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::{fit, ClassifierSpec, TrainedModel};
use crate::strategies::BatchSelection;

/// A per-iteration metric and its aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub name: String,
    pub values: Vec<f64>,
    pub aggregate: f64,
}

impl MetricSeries {
    pub fn mean(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let aggregate = mean(&values).ok_or_else(|| Error::Parameter("empty series".into()))?;
        Ok(Self {
            name: name.into(),
            values,
            aggregate,
        })
    }

    pub fn accuracy_auc(values: Vec<f64>) -> Result<Self> {
        let aggregate = accuracy_auc(&values)?;
        Ok(Self {
            name: "auc".into(),
            values,
            aggregate,
        })
    }
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> Option<f64> {
    let m = mean(values)?;
    Some((values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt())
}

/// Linear-interpolation quantile of an unsorted sample, `q` in [0, 1].
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Parameter("accuracy of an empty set".into()));
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Mean accuracy over iterations on a 0-100 scale.
pub fn accuracy_auc(per_iteration: &[f64]) -> Result<f64> {
    mean(per_iteration)
        .map(|m| m * 100.0)
        .ok_or_else(|| Error::Parameter("accuracy series is empty".into()))
}

/// Fraction of the batch flagged noisy.
pub fn nsr(batch: &BatchSelection, noise_flags: Option<&[bool]>) -> Result<f64> {
    let flags = noise_flags
        .ok_or_else(|| Error::MetricUnavailable("dataset has no noise flags".into()))?;
    if batch.is_empty() {
        return Err(Error::Parameter("nsr of an empty batch".into()));
    }
    Ok(count_noisy(&batch.indices, flags)? as f64 / batch.len() as f64)
}

fn count_noisy(indices: &[usize], flags: &[bool]) -> Result<usize> {
    indices.iter().try_fold(0usize, |acc, &i| {
        flags
            .get(i)
            .map(|&f| acc + usize::from(f))
            .ok_or_else(|| Error::Shape(format!("batch index {i} has no noise flag")))
    })
}

/// Running noisy-sample count over all batches selected so far.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NoisyTally {
    pub noisy: usize,
    pub selected: usize,
}

impl NoisyTally {
    /// Adds a batch and returns its own NSR.
    pub fn add(&mut self, batch: &BatchSelection, flags: &[bool]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Parameter("nsr of an empty batch".into()));
        }
        let noisy = count_noisy(&batch.indices, flags)?;
        self.noisy += noisy;
        self.selected += batch.len();
        Ok(noisy as f64 / batch.len() as f64)
    }

    pub fn cumulative_nsr(&self) -> Option<f64> {
        (self.selected > 0).then(|| self.noisy as f64 / self.selected as f64)
    }
}

/// Classifier trained on the test fold, used to judge how hard selected
/// samples are. Low accuracy on a batch means noisy selections.
#[derive(Debug, Clone)]
pub struct ReverseJudge {
    model: TrainedModel,
}

impl ReverseJudge {
    pub fn fit(dataset: &Dataset, test_indices: &[usize], spec: &ClassifierSpec, seed: u64) -> Result<Self> {
        let x = dataset.rows(test_indices);
        let y = dataset.labels_of(test_indices);
        let model = fit(spec, x.view(), &y, dataset.n_classes(), seed)?;
        Ok(Self { model })
    }

    pub fn batch_accuracy(&self, dataset: &Dataset, batch: &BatchSelection) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Parameter("rba of an empty batch".into()));
        }
        let x = dataset.rows(&batch.indices);
        let predicted = self.model.predict(x.view())?;
        accuracy(&predicted, &dataset.labels_of(&batch.indices))
    }
}

/// Reverse batch accuracy: fit `spec` on the test samples, score the batch.
pub fn rba(
    batch: &BatchSelection,
    dataset: &Dataset,
    test_indices: &[usize],
    spec: &ClassifierSpec,
    seed: u64,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Parameter("rba of an empty batch".into()));
    }
    ReverseJudge::fit(dataset, test_indices, spec, seed)?.batch_accuracy(dataset, batch)
}
