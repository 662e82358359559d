//! Uncertainty scores. Higher always means "query this sample first".

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ProbabilityMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("score {i} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `1 - h1(x)`.
pub fn score_lowest_confidence(probs: &ProbabilityMatrix) -> ScoreVector {
    ScoreVector((0..probs.n_rows()).map(|i| 1.0 - probs.top2(i).0).collect())
}

/// `1 - (h1(x) - h2(x))`.
pub fn score_margin(probs: &ProbabilityMatrix) -> ScoreVector {
    ScoreVector(
        (0..probs.n_rows())
            .map(|i| {
                let (h1, h2) = probs.top2(i);
                1.0 - (h1 - h2)
            })
            .collect(),
    )
}

/// Which probability of the ideal model is compared against the current
/// model's confidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IConfidenceMode {
    /// The ideal model's maximum probability.
    #[default]
    Max,
    /// The ideal model's probability for the current model's predicted class.
    CurrentArgmax,
    /// The ideal model's probability for the ground-truth class.
    TrueClass,
}

/// Informed confidence `h_ideal(x) - h1(x)` with the default [`IConfidenceMode::Max`].
pub fn score_iconfidence(
    current: &ProbabilityMatrix,
    ideal: &ProbabilityMatrix,
) -> Result<ScoreVector> {
    score_iconfidence_with(current, ideal, IConfidenceMode::Max, None)
}

pub fn score_iconfidence_with(
    current: &ProbabilityMatrix,
    ideal: &ProbabilityMatrix,
    mode: IConfidenceMode,
    true_labels: Option<&[usize]>,
) -> Result<ScoreVector> {
    if current.n_rows() != ideal.n_rows() {
        return Err(Error::Shape(format!(
            "current model covers {} rows, ideal model {}",
            current.n_rows(),
            ideal.n_rows()
        )));
    }
    if current.n_classes() != ideal.n_classes() {
        return Err(Error::Shape("class count differs between models".into()));
    }
    let labels = match (mode, true_labels) {
        (IConfidenceMode::TrueClass, Some(l)) if l.len() == current.n_rows() => Some(l),
        (IConfidenceMode::TrueClass, _) => {
            return Err(Error::Shape("true_class mode needs one label per row".into()))
        }
        _ => None,
    };
    let scores = (0..current.n_rows())
        .map(|i| {
            let h1 = current.top2(i).0;
            let reference = match mode {
                IConfidenceMode::Max => ideal.top2(i).0,
                IConfidenceMode::CurrentArgmax => ideal.row(i)[current.argmax(i)],
                IConfidenceMode::TrueClass => ideal.row(i)[labels.unwrap()[i]],
            };
            reference - h1
        })
        .collect();
    Ok(ScoreVector(scores))
}
