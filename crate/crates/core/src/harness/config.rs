use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{load_csv, make_noisy_blobs, BlobConfig, Dataset};
use crate::error::{Error, Result};
use crate::models::ClassifierSpec;
use crate::strategies::{IConfidenceMode, Strategy, StrategyParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    Blobs(BlobConfig),
    Csv {
        path: PathBuf,
        #[serde(default = "default_label_column")]
        label_column: String,
        #[serde(default)]
        noise_column: Option<String>,
    },
}

fn default_label_column() -> String {
    crate::data::LABEL_COLUMN.to_string()
}

impl DatasetSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetSource::Blobs(cfg) => make_noisy_blobs(cfg),
            DatasetSource::Csv {
                path,
                label_column,
                noise_column,
            } => load_csv(path, label_column, noise_column.as_deref()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    #[serde(default)]
    pub classifier: ClassifierSpec,
    pub strategies: Vec<Strategy>,
    pub n_iterations: usize,
    pub batch_size: usize,
    #[serde(default = "default_beta")]
    pub beta: usize,
    #[serde(default = "default_kcenter_dim")]
    pub kcenter_dim: usize,
    #[serde(default)]
    pub iconfidence_mode: IConfidenceMode,
    #[serde(default = "default_repeats")]
    pub n_repeats: usize,
    #[serde(default = "default_folds")]
    pub n_folds: usize,
    #[serde(default = "default_seed_per_class")]
    pub n_seed_per_class: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads for cell execution; `None` lets rayon decide.
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_beta() -> usize {
    StrategyParams::default().beta
}

fn default_kcenter_dim() -> usize {
    StrategyParams::default().kcenter_dim
}

fn default_repeats() -> usize {
    5
}

fn default_folds() -> usize {
    2
}

fn default_seed_per_class() -> usize {
    1
}

impl ExperimentConfig {
    /// Default protocol on the given dataset with a random forest.
    pub fn new(dataset: DatasetSource, strategies: Vec<Strategy>) -> Self {
        Self {
            dataset,
            classifier: ClassifierSpec::default(),
            strategies,
            n_iterations: 10,
            batch_size: 10,
            beta: default_beta(),
            kcenter_dim: default_kcenter_dim(),
            iconfidence_mode: IConfidenceMode::default(),
            n_repeats: default_repeats(),
            n_folds: default_folds(),
            n_seed_per_class: default_seed_per_class(),
            seed: 0,
            output_dir: None,
            workers: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. Relative CSV paths are resolved against the
    /// directory holding the config.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        let mut cfg = Self::from_json(&text)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new("")));
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        if let DatasetSource::Csv { path, .. } = &mut self.dataset {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::Config(format!("{field}: {msg}")));
        if self.n_iterations == 0 {
            return bad("n_iterations", "must be >= 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be >= 1");
        }
        if self.beta == 0 {
            return bad("beta", "must be >= 1");
        }
        if self.kcenter_dim == 0 {
            return bad("kcenter_dim", "must be >= 1");
        }
        if self.strategies.is_empty() {
            return bad("strategies", "at least one strategy is required");
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if self.strategies[..i].contains(s) {
                return bad("strategies", &format!("`{s}` listed twice"));
            }
        }
        if self.n_repeats == 0 {
            return bad("n_repeats", "must be >= 1");
        }
        if self.n_folds < 2 {
            return bad("n_folds", "must be >= 2");
        }
        if self.n_seed_per_class == 0 {
            return bad("n_seed_per_class", "must be >= 1");
        }
        if self.workers == Some(0) {
            return bad("workers", "must be >= 1");
        }
        if let DatasetSource::Blobs(b) = &self.dataset {
            b.validate()
                .map_err(|e| Error::Config(format!("dataset.{}", strip_config_prefix(&e))))?;
        }
        self.classifier.validate()
    }

    pub fn strategy_params(&self) -> StrategyParams {
        StrategyParams {
            beta: self.beta,
            kcenter_dim: self.kcenter_dim,
            iconfidence_mode: self.iconfidence_mode,
        }
    }
}

fn strip_config_prefix(e: &Error) -> String {
    match e {
        Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}
