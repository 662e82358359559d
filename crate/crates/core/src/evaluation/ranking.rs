//! Friedman test over methods x blocks with Nemenyi critical distances.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Critical values of the studentized range statistic with infinite degrees
/// of freedom divided by sqrt(2), for k = 2..=10 methods.
pub const NEMENYI_Q_005: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];
pub const NEMENYI_Q_010: [f64; 9] = [1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920];

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub p_value: f64,
    pub mean_ranks: Vec<f64>,
}

/// Ranks one block; the highest score gets rank 1 and ties share the average rank.
pub fn rank_descending(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// `scores[[method, block]]`, larger is better.
pub fn friedman_test(scores: &Array2<f64>) -> Result<FriedmanResult> {
    let (k, n) = scores.dim();
    if k < 3 {
        return Err(Error::Parameter(format!("friedman test needs >= 3 methods, got {k}")));
    }
    if n < 2 {
        return Err(Error::Parameter(format!("friedman test needs >= 2 blocks, got {n}")));
    }
    if scores.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("scores must be finite".into()));
    }
    let mut rank_sums = vec![0.0; k];
    for block in scores.columns() {
        for (m, r) in rank_descending(&block.to_vec()).into_iter().enumerate() {
            rank_sums[m] += r;
        }
    }
    let mean_ranks: Vec<f64> = rank_sums.iter().map(|s| s / n as f64).collect();
    let kf = k as f64;
    let nf = n as f64;
    let sum_sq: f64 = mean_ranks.iter().map(|r| r * r).sum();
    let statistic =
        (12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    let p_value = if statistic <= 1e-12 {
        1.0
    } else {
        ChiSquared::new(kf - 1.0).expect("k >= 3").sf(statistic)
    };
    Ok(FriedmanResult {
        statistic,
        p_value,
        mean_ranks,
    })
}

pub fn nemenyi_q(n_methods: usize, alpha: f64) -> Result<f64> {
    let table = if (alpha - 0.05).abs() < 1e-12 {
        &NEMENYI_Q_005
    } else if (alpha - 0.10).abs() < 1e-12 {
        &NEMENYI_Q_010
    } else {
        return Err(Error::Parameter(format!("alpha must be 0.05 or 0.10, got {alpha}")));
    };
    if !(2..=10).contains(&n_methods) {
        return Err(Error::Parameter(format!(
            "nemenyi table covers 2..=10 methods, got {n_methods}"
        )));
    }
    Ok(table[n_methods - 2])
}

/// `q_alpha(k) * sqrt(k (k + 1) / (6 N))`.
pub fn nemenyi_cd(n_methods: usize, n_blocks: usize, alpha: f64) -> Result<f64> {
    if n_blocks == 0 {
        return Err(Error::Parameter("n_blocks must be positive".into()));
    }
    let q = nemenyi_q(n_methods, alpha)?;
    let k = n_methods as f64;
    Ok(q * (k * (k + 1.0) / (6.0 * n_blocks as f64)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub methods: Vec<String>,
    pub mean_ranks: Vec<f64>,
    pub friedman_statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub critical_distance: f64,
    pub n_blocks: usize,
    /// `significant[a][b]`: mean ranks of a and b differ by more than the critical distance.
    pub significant: Vec<Vec<bool>>,
    /// Blocks left out because some method had no score there.
    #[serde(default)]
    pub dropped_blocks: usize,
}

impl RankReport {
    pub fn build(methods: Vec<String>, scores: &Array2<f64>, alpha: f64) -> Result<Self> {
        if methods.len() != scores.nrows() {
            return Err(Error::Shape(format!(
                "{} method names for {} score rows",
                methods.len(),
                scores.nrows()
            )));
        }
        let friedman = friedman_test(scores)?;
        let cd = nemenyi_cd(methods.len(), scores.ncols(), alpha)?;
        let k = methods.len();
        let significant = (0..k)
            .map(|a| {
                (0..k)
                    .map(|b| a != b && (friedman.mean_ranks[a] - friedman.mean_ranks[b]).abs() > cd)
                    .collect()
            })
            .collect();
        Ok(Self {
            methods,
            mean_ranks: friedman.mean_ranks,
            friedman_statistic: friedman.statistic,
            p_value: friedman.p_value,
            alpha,
            critical_distance: cd,
            n_blocks: scores.ncols(),
            significant,
            dropped_blocks: 0,
        })
    }

    /// Plain-text critical-difference summary: methods by mean rank, then the
    /// maximal groups whose members are not significantly different.
    pub fn summary(&self) -> String {
        let mut order: Vec<usize> = (0..self.methods.len()).collect();
        order.sort_by(|&a, &b| {
            self.mean_ranks[a]
                .partial_cmp(&self.mean_ranks[b])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut out = String::new();
        out.push_str(&format!(
            "Friedman chi2 = {:.4}, p = {:.4e} ({} methods, {} blocks)\n",
            self.friedman_statistic,
            self.p_value,
            self.methods.len(),
            self.n_blocks
        ));
        out.push_str(&format!(
            "Nemenyi critical distance (alpha = {}) = {:.4}\n",
            self.alpha, self.critical_distance
        ));
        if self.dropped_blocks > 0 {
            out.push_str(&format!("{} incomplete blocks dropped\n", self.dropped_blocks));
        }
        out.push_str("\nmean rank  method\n");
        for &m in &order {
            out.push_str(&format!("{:>9.3}  {}\n", self.mean_ranks[m], self.methods[m]));
        }
        let mut groups: Vec<(usize, usize)> = Vec::new();
        for start in 0..order.len() {
            let mut end = start;
            while end + 1 < order.len()
                && self.mean_ranks[order[end + 1]] - self.mean_ranks[order[start]]
                    <= self.critical_distance
            {
                end += 1;
            }
            if end > start && groups.last().is_none_or(|&(_, e)| end > e) {
                groups.push((start, end));
            }
        }
        out.push_str("\nnot significantly different:\n");
        if groups.is_empty() {
            out.push_str("  (none)\n");
        }
        for (s, e) in groups {
            let names: Vec<&str> = order[s..=e].iter().map(|&m| self.methods[m].as_str()).collect();
            out.push_str(&format!("  [{}]\n", names.join(", ")));
        }
        out
    }
}
