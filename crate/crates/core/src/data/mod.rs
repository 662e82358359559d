//! Datasets, ingestion, cross-validation plans and the noisy-blob generator.

mod blobs;
mod csv_io;
mod cv;

pub use blobs::{make_noisy_blobs, make_noisy_blobs_with_layout, BlobConfig, BlobKind, BlobLayout};
pub use csv_io::{load_csv, write_csv, LABEL_COLUMN, NOISE_COLUMN};
pub use cv::{initial_pool, plan_cv, CvPlan, PoolState, Split};

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Feature matrix with integer class labels and optional noise flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    noise_flags: Option<Vec<bool>>,
    n_classes: usize,
    name: String,
    /// Raw label for each encoded class id.
    class_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        noise_flags: Option<Vec<bool>>,
        n_classes: usize,
        name: impl Into<String>,
    ) -> Result<Self> {
        let class_names = (0..n_classes).map(|c| c.to_string()).collect();
        Self::with_class_names(features, labels, noise_flags, n_classes, name, class_names)
    }

    pub fn with_class_names(
        features: Array2<f64>,
        labels: Vec<usize>,
        noise_flags: Option<Vec<bool>>,
        n_classes: usize,
        name: impl Into<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n = features.nrows();
        if n_classes < 2 {
            return Err(Error::InvalidDataset(format!(
                "n_classes must be at least 2, got {n_classes}"
            )));
        }
        if labels.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {} samples",
                labels.len(),
                n
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} out of range for {n_classes} classes"
            )));
        }
        if let Some(flags) = &noise_flags {
            if flags.len() != n {
                return Err(Error::InvalidDataset(format!(
                    "{} noise flags for {} samples",
                    flags.len(),
                    n
                )));
            }
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite feature at row {}, column {}",
                pos / features.ncols().max(1),
                pos % features.ncols().max(1)
            )));
        }
        if class_names.len() != n_classes {
            return Err(Error::InvalidDataset(format!(
                "{} class names for {} classes",
                class_names.len(),
                n_classes
            )));
        }
        Ok(Self {
            features,
            labels,
            noise_flags,
            n_classes,
            name: name.into(),
            class_names,
        })
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn noise_flags(&self) -> Option<&[bool]> {
        self.noise_flags.as_deref()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Copies the given rows into a new feature matrix.
    pub fn rows(&self, indices: &[usize]) -> Array2<f64> {
        self.features.select(Axis(0), indices)
    }

    pub fn labels_of(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&i| self.labels[i]).collect()
    }
}
