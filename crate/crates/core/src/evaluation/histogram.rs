//! Distribution of the maximum predicted probability under 2-fold
//! cross-prediction: every sample is scored by a model that never saw it.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{plan_cv, Dataset};
use crate::error::{Error, Result};
use crate::models::{fit, ClassifierSpec};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_low: f64,
    pub bin_high: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceHistogram {
    pub bins: Vec<HistogramBin>,
    /// Cross-predicted maximum probability of every sample.
    pub max_probabilities: Vec<f64>,
}

impl ConfidenceHistogram {
    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }

    /// Share of samples whose max probability lies in `[low, 1]`.
    pub fn mass_at_least(&self, low: f64) -> f64 {
        let n = self.max_probabilities.len();
        if n == 0 {
            return 0.0;
        }
        self.max_probabilities.iter().filter(|&&p| p >= low).count() as f64 / n as f64
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_low", "bin_high", "count"])?;
        for b in &self.bins {
            w.write_record([b.bin_low.to_string(), b.bin_high.to_string(), b.count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn bin_max_probabilities(values: Vec<f64>, n_bins: usize) -> Result<ConfidenceHistogram> {
    if n_bins == 0 {
        return Err(Error::Parameter("n_bins must be positive".into()));
    }
    let mut counts = vec![0usize; n_bins];
    for &p in &values {
        // The last bin is closed on the right so that p = 1 is counted.
        let b = ((p * n_bins as f64).floor() as usize).min(n_bins - 1);
        counts[b] += 1;
    }
    let bins = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            bin_low: i as f64 / n_bins as f64,
            bin_high: (i + 1) as f64 / n_bins as f64,
            count,
        })
        .collect();
    Ok(ConfidenceHistogram {
        bins,
        max_probabilities: values,
    })
}

pub fn confidence_histogram(
    dataset: &Dataset,
    spec: &ClassifierSpec,
    n_bins: usize,
    seed: u64,
) -> Result<ConfidenceHistogram> {
    let plan = plan_cv(dataset.n_samples(), dataset.labels(), 1, 2, seed)?;
    let mut max_prob = vec![0.0; dataset.n_samples()];
    for split in plan.splits() {
        let x = dataset.rows(&split.train);
        let y = dataset.labels_of(&split.train);
        let model = fit(
            spec,
            x.view(),
            &y,
            dataset.n_classes(),
            derive_seed(seed, &["audit".into(), split.fold.into()]),
        )?;
        let probs = model.predict_proba(dataset.rows(&split.test).view())?;
        for (row, &i) in split.test.iter().enumerate() {
            max_prob[i] = probs.top2(row).0;
        }
    }
    bin_max_probabilities(max_prob, n_bins)
}
