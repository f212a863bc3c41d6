//! Tweet-level k-fold cross-validation splits with 70/10/20
//! train/dev/test proportions.
//!
//! The tweet indices are shuffled once (seeded), then cut into k test
//! shards of as-equal-as-possible size (the first `n mod k` shards get
//! one extra tweet). For each fold the dev set takes ⌊n/10⌋ of the
//! remaining tweets (in shuffle order) and the train set the rest, so
//! rounding remainders always land in train. 350 tweets thus give
//! exactly 245/35/70 per fold. Splits never separate the tokens of one
//! tweet, which keeps test tweets fully unseen.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// The three index sets of one fold. Indices are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

/// A full assignment of tweet indices to k folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    seed: u64,
    n: usize,
    folds: Vec<Fold>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of tweets the plan covers.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn folds(&self) -> &[Fold] {
        &self.folds
    }
}

/// Builds the fold plan for `n_tweets` tweets.
pub fn split_folds(n_tweets: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k <= 1 {
        return Err(Error::validation(format!("cross-validation needs k ≥ 2, got {k}")));
    }
    if n_tweets < k {
        return Err(Error::validation(format!("cannot make {k} folds from {n_tweets} tweets")));
    }
    let mut order: Vec<usize> = (0..n_tweets).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let base = n_tweets / k;
    let extra = n_tweets % k;
    let mut shards: Vec<Vec<usize>> = Vec::with_capacity(k);
    let mut cursor = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        shards.push(order[cursor..cursor + size].to_vec());
        cursor += size;
    }

    let dev_size = n_tweets / 10;
    let mut folds = Vec::with_capacity(k);
    for f in 0..k {
        let test = shards[f].clone();
        let rest: Vec<usize> =
            order.iter().copied().filter(|i| !shards[f].contains(i)).collect();
        let (dev, train) = rest.split_at(dev_size);
        let mut fold =
            Fold { train: train.to_vec(), dev: dev.to_vec(), test };
        fold.train.sort_unstable();
        fold.dev.sort_unstable();
        fold.test.sort_unstable();
        folds.push(fold);
    }
    Ok(FoldPlan { k, seed, n: n_tweets, folds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn three_fifty_tweets_split_245_35_70() {
        let plan = split_folds(350, 5, 42).unwrap();
        for fold in plan.folds() {
            assert_eq!(fold.train.len(), 245);
            assert_eq!(fold.dev.len(), 35);
            assert_eq!(fold.test.len(), 70);
        }
    }

    #[test]
    fn same_seed_reproduces_the_plan() {
        assert_eq!(split_folds(101, 5, 7).unwrap(), split_folds(101, 5, 7).unwrap());
        assert_ne!(split_folds(101, 5, 7).unwrap(), split_folds(101, 5, 8).unwrap());
    }

    #[test]
    fn rejects_degenerate_requests() {
        assert!(split_folds(10, 1, 0).is_err());
        assert!(split_folds(3, 5, 0).is_err());
    }

    proptest! {
        #[test]
        fn partition_laws_hold(n in 10usize..400, k in 2usize..8, seed in 0u64..50) {
            prop_assume!(n >= k);
            let plan = split_folds(n, k, seed).unwrap();
            // Union of test shards is everything, pairwise disjoint.
            let mut seen = BTreeSet::new();
            for fold in plan.folds() {
                for &i in &fold.test {
                    prop_assert!(seen.insert(i), "tweet {i} in two test shards");
                }
            }
            prop_assert_eq!(seen.len(), n);
            for fold in plan.folds() {
                // Within a fold the three splits partition 0..n.
                let mut all: Vec<usize> = fold
                    .train
                    .iter()
                    .chain(&fold.dev)
                    .chain(&fold.test)
                    .copied()
                    .collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                prop_assert_eq!(fold.dev.len(), n / 10);
                // Test shards are near-equal: ±1 around n/k.
                prop_assert!(fold.test.len() == n / k || fold.test.len() == n / k + 1);
            }
        }
    }
}
