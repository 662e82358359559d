//! Synthetic task made of spatially isolated Gaussian blobs.
//!
//! Regular blobs hold samples of a single class. Noisy blobs draw each sample's
//! label from two distinct classes with a fair coin, so no classifier can do
//! better than chance inside them.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

const MAX_CENTER_RETRIES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobConfig {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_classes: usize,
    pub n_blobs: usize,
    pub n_noisy_blobs: usize,
    #[serde(default = "default_blob_std")]
    pub blob_std: f64,
    #[serde(default = "default_halfwidth")]
    pub center_box_halfwidth: f64,
    /// Minimum pairwise center distance, in multiples of `blob_std`.
    #[serde(default = "default_separation")]
    pub min_center_separation: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_blob_std() -> f64 {
    1.0
}

fn default_halfwidth() -> f64 {
    100.0
}

fn default_separation() -> f64 {
    6.0
}

impl BlobConfig {
    /// Low-dimensional problem: 10000 samples, 2 features, 10 classes,
    /// 200 blobs of which 100 are noisy.
    pub fn low_dimensional(seed: u64) -> Self {
        Self {
            n_samples: 10_000,
            n_features: 2,
            n_classes: 10,
            n_blobs: 200,
            n_noisy_blobs: 100,
            blob_std: default_blob_std(),
            center_box_halfwidth: default_halfwidth(),
            min_center_separation: default_separation(),
            seed,
        }
    }

    /// High-dimensional problem: 10000 samples, 40 features, 10 classes,
    /// 90 blobs of which 30 are noisy.
    pub fn high_dimensional(seed: u64) -> Self {
        Self {
            n_features: 40,
            n_blobs: 90,
            n_noisy_blobs: 30,
            ..Self::low_dimensional(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, msg: &str| Err(Error::Config(format!("{name}: {msg}")));
        if self.n_samples == 0 {
            return field("n_samples", "must be positive");
        }
        if self.n_features == 0 {
            return field("n_features", "must be positive");
        }
        if self.n_classes < 2 {
            return field("n_classes", "must be at least 2");
        }
        if self.n_blobs == 0 {
            return field("n_blobs", "must be positive");
        }
        if self.n_noisy_blobs > self.n_blobs {
            return field("n_noisy_blobs", "must not exceed n_blobs");
        }
        if self.n_classes > self.n_blobs {
            return field("n_classes", "must not exceed n_blobs");
        }
        if !(self.blob_std > 0.0 && self.blob_std.is_finite()) {
            return field("blob_std", "must be a positive finite number");
        }
        if !(self.center_box_halfwidth > 0.0 && self.center_box_halfwidth.is_finite()) {
            return field("center_box_halfwidth", "must be a positive finite number");
        }
        if !(self.min_center_separation >= 0.0 && self.min_center_separation.is_finite()) {
            return field("min_center_separation", "must be non-negative and finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlobKind {
    Regular { class: usize },
    Noisy { classes: [usize; 2] },
}

impl BlobKind {
    pub fn is_noisy(&self) -> bool {
        matches!(self, BlobKind::Noisy { .. })
    }
}

/// Generation ground truth: where the blobs are and which sample came from where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobLayout {
    pub centers: Vec<Vec<f64>>,
    pub kinds: Vec<BlobKind>,
    pub blob_of_sample: Vec<usize>,
}

impl BlobLayout {
    pub fn occupancy(&self) -> Vec<usize> {
        let mut counts = vec![0; self.kinds.len()];
        for &b in &self.blob_of_sample {
            counts[b] += 1;
        }
        counts
    }

    pub fn min_center_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.centers.len() {
            for j in (i + 1)..self.centers.len() {
                best = best.min(euclidean(&self.centers[i], &self.centers[j]));
            }
        }
        best
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn make_noisy_blobs(config: &BlobConfig) -> Result<Dataset> {
    make_noisy_blobs_with_layout(config).map(|(d, _)| d)
}

pub fn make_noisy_blobs_with_layout(config: &BlobConfig) -> Result<(Dataset, BlobLayout)> {
    config.validate()?;
    let mut rng = rng_from_seed(config.seed);
    let d = config.n_features;
    let hw = config.center_box_halfwidth;
    let min_dist = config.min_center_separation * config.blob_std;

    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(config.n_blobs);
    for blob in 0..config.n_blobs {
        let mut placed = false;
        for _ in 0..MAX_CENTER_RETRIES {
            let c: Vec<f64> = (0..d).map(|_| rng.random_range(-hw..=hw)).collect();
            if centers.iter().all(|o| euclidean(o, &c) >= min_dist) {
                centers.push(c);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Generation(format!(
                "could not place blob {blob} at distance >= {} ({} x blob_std) from the \
                 {blob} previous centers after {MAX_CENTER_RETRIES} retries; enlarge \
                 center_box_halfwidth or lower min_center_separation",
                min_dist, config.min_center_separation
            )));
        }
    }

    // Partial Fisher-Yates picks the noisy subset.
    let mut order: Vec<usize> = (0..config.n_blobs).collect();
    for i in 0..config.n_noisy_blobs {
        let j = rng.random_range(i..config.n_blobs);
        order.swap(i, j);
    }
    let mut noisy = vec![false; config.n_blobs];
    for &b in &order[..config.n_noisy_blobs] {
        noisy[b] = true;
    }

    let k = config.n_classes;
    let mut next_regular = 0usize;
    let kinds: Vec<BlobKind> = noisy
        .iter()
        .map(|&is_noisy| {
            if is_noisy {
                let a = rng.random_range(0..k);
                let mut b = rng.random_range(0..k - 1);
                if b >= a {
                    b += 1;
                }
                BlobKind::Noisy {
                    classes: [a.min(b), a.max(b)],
                }
            } else {
                let class = next_regular % k;
                next_regular += 1;
                BlobKind::Regular { class }
            }
        })
        .collect();

    let n = config.n_samples;
    let mut features = Array2::<f64>::zeros((n, d));
    let mut labels = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    let mut blob_of_sample = Vec::with_capacity(n);
    for i in 0..n {
        let b = rng.random_range(0..config.n_blobs);
        for (j, c) in centers[b].iter().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            features[[i, j]] = c + config.blob_std * z;
        }
        let label = match kinds[b] {
            BlobKind::Regular { class } => class,
            BlobKind::Noisy { classes } => classes[rng.random_range(0..2usize)],
        };
        labels.push(label);
        flags.push(kinds[b].is_noisy());
        blob_of_sample.push(b);
    }

    let name = format!(
        "noisy_blobs(n={},d={},classes={},blobs={},noisy={},seed={})",
        n, d, k, config.n_blobs, config.n_noisy_blobs, config.seed
    );
    let dataset = Dataset::new(features, labels, Some(flags), k, name)?;
    Ok((
        dataset,
        BlobLayout {
            centers,
            kinds,
            blob_of_sample,
        },
    ))
}
