//! Batch active learning benchmark toolkit.
//!
//! The crate bundles everything needed to study how sample noise affects
//! pool-based active learning:
//!
//! - [`data`]: datasets, CSV ingestion, stratified repeated k-fold plans and the
//!   synthetic noisy-blob generator.
//! - [`models`]: a small MLP and a CART random forest producing class
//!   probabilities, plus forest/MLP embeddings and PCA.
//! - [`strategies`]: uncertainty scores, Random, KCenterGreedy, WKMeans and the
//!   fixed-centroid IWKMeans sampler.
//! - [`evaluation`]: accuracy AUC, noisy sample ratio, reverse batch accuracy,
//!   the max-probability audit and Friedman/Nemenyi ranking.
//! - [`harness`]: the active learning loop, experiment orchestration and run
//!   log persistence.
//! - [`cli`]: the `noisyal` command line driver.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod cli;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod harness;
pub mod models;
pub mod rng;
pub mod strategies;

pub use error::{Error, Result};
