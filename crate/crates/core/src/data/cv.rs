use rand::seq::{IndexedRandom, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Stratified repeated k-fold assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub n_repeats: usize,
    pub n_folds: usize,
    pub seed: u64,
    /// `assignments[repeat][sample]` is the fold holding that sample.
    pub assignments: Vec<Vec<usize>>,
}

/// One train/test split of a [`CvPlan`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub repeat: usize,
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl CvPlan {
    pub fn fold_members(&self, repeat: usize, fold: usize) -> Vec<usize> {
        self.assignments[repeat]
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn split(&self, repeat: usize, fold: usize) -> Split {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..self.assignments[repeat].len()).partition(|&i| self.assignments[repeat][i] == fold);
        Split {
            repeat,
            fold,
            train,
            test,
        }
    }

    /// All splits, repeat-major.
    pub fn splits(&self) -> Vec<Split> {
        (0..self.n_repeats)
            .flat_map(|r| (0..self.n_folds).map(move |f| (r, f)))
            .map(|(r, f)| self.split(r, f))
            .collect()
    }
}

pub fn plan_cv(
    n_samples: usize,
    labels: &[usize],
    n_repeats: usize,
    n_folds: usize,
    seed: u64,
) -> Result<CvPlan> {
    if n_folds < 2 {
        return Err(Error::Parameter(format!("n_folds must be >= 2, got {n_folds}")));
    }
    if n_repeats == 0 {
        return Err(Error::Parameter("n_repeats must be positive".into()));
    }
    if labels.len() != n_samples {
        return Err(Error::Shape(format!(
            "{} labels for {} samples",
            labels.len(),
            n_samples
        )));
    }
    let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    for (class, m) in members.iter().enumerate() {
        if !m.is_empty() && m.len() < n_folds {
            return Err(Error::Stratification(format!(
                "class {class} has {} members, fewer than {n_folds} folds",
                m.len()
            )));
        }
    }

    let mut assignments = Vec::with_capacity(n_repeats);
    for repeat in 0..n_repeats {
        let mut rng = rng_from_seed(derive_seed(seed, &["cv".into(), repeat.into()]));
        let mut fold_of = vec![0usize; n_samples];
        // The offset carries over between classes so that total fold sizes
        // also differ by at most one.
        let mut offset = 0usize;
        for m in &members {
            let mut shuffled = m.clone();
            shuffled.shuffle(&mut rng);
            for (j, &i) in shuffled.iter().enumerate() {
                fold_of[i] = (offset + j) % n_folds;
            }
            offset += shuffled.len();
        }
        assignments.push(fold_of);
    }
    Ok(CvPlan {
        n_repeats,
        n_folds,
        seed,
        assignments,
    })
}

/// Disjoint labeled / unlabeled / test index sets, each kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolState {
    pub labeled: Vec<usize>,
    pub unlabeled: Vec<usize>,
    pub test: Vec<usize>,
}

impl PoolState {
    pub fn validate(&self, n_samples: usize) -> Result<()> {
        let mut seen = vec![0u8; n_samples];
        for (set, tag) in [(&self.labeled, 1u8), (&self.unlabeled, 2), (&self.test, 4)] {
            for &i in set {
                if i >= n_samples {
                    return Err(Error::Shape(format!("pool index {i} out of range")));
                }
                if seen[i] != 0 {
                    return Err(Error::Parameter(format!("index {i} in more than one pool set")));
                }
                seen[i] = tag;
            }
        }
        Ok(())
    }

    /// Moves `batch` from the unlabeled to the labeled set.
    pub fn label(&mut self, batch: &[usize]) -> Result<()> {
        let mut batch_sorted = batch.to_vec();
        batch_sorted.sort_unstable();
        for &b in &batch_sorted {
            if self.unlabeled.binary_search(&b).is_err() {
                return Err(Error::Selection(format!("index {b} is not in the unlabeled pool")));
            }
        }
        self.unlabeled.retain(|i| batch_sorted.binary_search(i).is_err());
        self.labeled.extend_from_slice(&batch_sorted);
        self.labeled.sort_unstable();
        Ok(())
    }
}

pub fn initial_pool(
    train: &[usize],
    test: &[usize],
    labels: &[usize],
    n_classes: usize,
    n_seed_per_class: usize,
    seed: u64,
) -> Result<PoolState> {
    if n_seed_per_class == 0 {
        return Err(Error::Parameter("n_seed_per_class must be positive".into()));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for &i in train {
        let l = *labels
            .get(i)
            .ok_or_else(|| Error::Shape(format!("train index {i} out of range")))?;
        if l >= n_classes {
            return Err(Error::Shape(format!("label {l} out of range")));
        }
        by_class[l].push(i);
    }
    let mut rng = rng_from_seed(seed);
    let mut labeled = Vec::with_capacity(n_classes * n_seed_per_class);
    for (class, members) in by_class.iter_mut().enumerate() {
        if members.len() < n_seed_per_class {
            return Err(Error::Seeding(format!(
                "class {class} has {} training samples, {n_seed_per_class} requested",
                members.len()
            )));
        }
        members.sort_unstable();
        labeled.extend(members.choose_multiple(&mut rng, n_seed_per_class).copied());
    }
    labeled.sort_unstable();
    let mut unlabeled: Vec<usize> = train
        .iter()
        .copied()
        .filter(|i| labeled.binary_search(i).is_err())
        .collect();
    unlabeled.sort_unstable();
    let mut test = test.to_vec();
    test.sort_unstable();
    let pool = PoolState {
        labeled,
        unlabeled,
        test,
    };
    pool.validate(labels.len())?;
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stratified_halving() {
        let labels = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let plan = plan_cv(10, &labels, 1, 2, 9).unwrap();
        for fold in 0..2 {
            let members = plan.fold_members(0, fold);
            assert_eq!(members.len(), 5);
            let ones = members.iter().filter(|&&i| labels[i] == 1).count();
            assert!((2..=3).contains(&ones));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let labels: Vec<usize> = (0..40).map(|i| i % 3).collect();
        assert_eq!(
            plan_cv(40, &labels, 2, 2, 5).unwrap(),
            plan_cv(40, &labels, 2, 2, 5).unwrap()
        );
        assert_ne!(
            plan_cv(40, &labels, 1, 2, 5).unwrap(),
            plan_cv(40, &labels, 1, 2, 6).unwrap()
        );
    }

    #[test]
    fn five_by_two_gives_ten_splits() {
        let labels: Vec<usize> = (0..100).map(|i| i % 4).collect();
        let plan = plan_cv(100, &labels, 5, 2, 1).unwrap();
        assert_eq!(plan.splits().len(), 10);
    }

    #[test]
    fn small_class_is_rejected() {
        let labels = [0, 0, 0, 1];
        assert!(matches!(plan_cv(4, &labels, 1, 2, 0), Err(Error::Stratification(_))));
    }

    #[test]
    fn pool_arithmetic() {
        let labels: Vec<usize> = (0..200).map(|i| i % 10).collect();
        let train: Vec<usize> = (0..100).collect();
        let test: Vec<usize> = (100..200).collect();
        let pool = initial_pool(&train, &test, &labels, 10, 1, 3).unwrap();
        assert_eq!(pool.labeled.len(), 10);
        assert_eq!(pool.unlabeled.len(), 90);
        assert_eq!(pool.test.len(), 100);
        let mut classes: Vec<usize> = pool.labeled.iter().map(|&i| labels[i]).collect();
        classes.sort_unstable();
        assert_eq!(classes, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn too_many_seeds_per_class() {
        let labels: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let train: Vec<usize> = (0..6).collect();
        assert!(matches!(
            initial_pool(&train, &[], &labels, 2, 4, 0),
            Err(Error::Seeding(_))
        ));
    }

    #[test]
    fn absent_class_is_a_seeding_error() {
        let labels = [0, 0, 1, 1];
        assert!(matches!(
            initial_pool(&[0, 1], &[2, 3], &labels, 2, 1, 0),
            Err(Error::Seeding(_))
        ));
    }

    #[test]
    fn label_moves_batch() {
        let mut pool = PoolState {
            labeled: vec![0],
            unlabeled: vec![1, 2, 3],
            test: vec![4],
        };
        pool.label(&[3, 1]).unwrap();
        assert_eq!(pool.labeled, vec![0, 1, 3]);
        assert_eq!(pool.unlabeled, vec![2]);
        assert!(pool.label(&[4]).is_err());
    }

    proptest! {
        #[test]
        fn plan_partitions_and_balances(
            n in 20usize..120, k in 2usize..5, folds in 2usize..4, repeats in 1usize..4, seed: u64
        ) {
            let labels: Vec<usize> = (0..n).map(|i| i % k).collect();
            let plan = plan_cv(n, &labels, repeats, folds, seed).unwrap();
            for r in 0..repeats {
                let sizes: Vec<usize> = (0..folds).map(|f| plan.fold_members(r, f).len()).collect();
                prop_assert_eq!(sizes.iter().sum::<usize>(), n);
                prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
                for f in 0..folds {
                    let s = plan.split(r, f);
                    prop_assert_eq!(s.train.len() + s.test.len(), n);
                    prop_assert!(s.train.iter().all(|i| !s.test.contains(i)));
                }
            }
        }

        #[test]
        fn initial_pool_invariants(seed: u64, per_class in 1usize..3) {
            let labels: Vec<usize> = (0..120).map(|i| i % 5).collect();
            let plan = plan_cv(120, &labels, 1, 2, seed).unwrap();
            let s = plan.split(0, 0);
            let pool = initial_pool(&s.train, &s.test, &labels, 5, per_class, seed).unwrap();
            prop_assert!(pool.validate(120).is_ok());
            prop_assert_eq!(pool.labeled.len(), 5 * per_class);
            prop_assert_eq!(pool.labeled.len() + pool.unlabeled.len(), s.train.len());
            prop_assert_eq!(pool.test, s.test);
        }
    }
}
