//! Pairwise linear ranking of candidate segmentations.
//!
//! Each training word contributes (gold, other) feature-vector pairs;
//! the model minimizes the SVM-style objective
//!
//! ```text
//! J(w) = 1/2 ‖w‖² + C · Σ_pairs max(0, 1 − w·(φ(gold) − φ(other)))
//! ```
//!
//! by seeded subgradient descent with step 1/(λt), λ = 1/(C·n_pairs),
//! over pairs shuffled once per epoch. Features are standardized to zero
//! mean and unit variance on the training data first (the probability
//! and length features differ in scale by orders of magnitude). The
//! weights kept are those of the best-objective epoch, which also makes
//! the recorded loss history non-increasing.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::affixes::{generate_candidates, AffixInventory, Segmentation};
use crate::error::{Error, Result};
use crate::features::{featurize, FeatureVector, LexiconSet, StatTables};

/// Default trade-off between training error and margin.
pub const DEFAULT_C: f64 = 100.0;
/// Epochs of pair-level subgradient descent.
pub const DEFAULT_EPOCHS: usize = 50;

const DIM: usize = FeatureVector::DIM;

/// One training word: the gold candidate's features at rank 1, every
/// other candidate's at rank 2.
#[derive(Debug, Clone)]
pub struct RankingInstance {
    pub word: String,
    pub gold: FeatureVector,
    pub others: Vec<FeatureVector>,
}

/// A trained linear ranking model plus its feature standardization.
#[derive(Debug, Clone)]
pub struct LinearRanker {
    pub(crate) weights: [f64; DIM],
    pub(crate) bias: f64,
    pub(crate) means: [f64; DIM],
    pub(crate) stds: [f64; DIM],
    pub(crate) c_param: f64,
    pub(crate) seed: u64,
    loss_history: Vec<f64>,
}

impl LinearRanker {
    pub fn weights(&self) -> &[f64; DIM] {
        &self.weights
    }

    pub fn c_param(&self) -> f64 {
        self.c_param
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Objective value retained after each training epoch;
    /// non-increasing because the best iterate is kept.
    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    fn standardize(&self, fv: &FeatureVector) -> [f64; DIM] {
        let x = fv.as_array();
        std::array::from_fn(|i| (x[i] - self.means[i]) / self.stds[i])
    }

    /// `w · standardize(fv) + bias`, linear in the standardized
    /// features.
    pub fn score(&self, fv: &FeatureVector) -> f64 {
        let z = self.standardize(fv);
        self.weights.iter().zip(z).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }

    /// Constructs a ranker with explicit parameters (identity
    /// standardization), mainly for tests and archive loading.
    pub fn from_parts(weights: [f64; DIM], bias: f64, means: [f64; DIM], stds: [f64; DIM], c_param: f64, seed: u64) -> Result<LinearRanker> {
        if stds.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::validation("standardization stddevs must be positive"));
        }
        Ok(LinearRanker { weights, bias, means, stds, c_param, seed, loss_history: Vec::new() })
    }
}

/// Turns gold `(word, segmentation)` pairs into ranking instances. Words
/// annotated inconsistently are first resolved by majority vote (most
/// frequent, then fewest segments, then earliest split), one instance
/// per distinct surface word. Words whose gold split is outside the
/// inventory's candidate set are skipped — the ranker can never produce
/// them — and returned by count.
pub fn ranking_instances(
    gold: &[(String, Segmentation)],
    inv: &AffixInventory,
    stats: &StatTables,
    lex: &LexiconSet,
) -> Result<(Vec<RankingInstance>, usize)> {
    let (resolved, _) = crate::lookup::vote(gold, false)?;
    let mut instances = Vec::new();
    let mut skipped = 0;
    for (word, gold_seg) in resolved {
        let set = generate_candidates(&word, inv);
        let gold_idx = match set.find_split(&gold_seg) {
            Some(i) => i,
            None => {
                skipped += 1;
                continue;
            }
        };
        let gold_fv = featurize(&set.candidates()[gold_idx], stats, lex);
        let others = set
            .candidates()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != gold_idx)
            .map(|(_, c)| featurize(c, stats, lex))
            .collect();
        instances.push(RankingInstance { word, gold: gold_fv, others });
    }
    Ok((instances, skipped))
}

/// Trains the ranker. Deterministic: the same instances and seed give
/// bitwise-identical weights.
pub fn train_ranker(
    instances: &[RankingInstance],
    c_param: f64,
    epochs: usize,
    seed: u64,
) -> Result<LinearRanker> {
    if !(c_param > 0.0) || !c_param.is_finite() {
        return Err(Error::validation(format!("C must be positive and finite, got {c_param}")));
    }
    for inst in instances {
        let finite =
            |fv: &FeatureVector| fv.as_array().iter().all(|v| v.is_finite());
        if !finite(&inst.gold) || !inst.others.iter().all(finite) {
            return Err(Error::validation(format!(
                "non-finite feature value in instance for word {:?}",
                inst.word
            )));
        }
    }

    // Standardization over every vector seen in training.
    let mut sum = [0.0; DIM];
    let mut sumsq = [0.0; DIM];
    let mut count = 0.0f64;
    for inst in instances {
        for fv in std::iter::once(&inst.gold).chain(&inst.others) {
            for (i, v) in fv.as_array().into_iter().enumerate() {
                sum[i] += v;
                sumsq[i] += v * v;
            }
            count += 1.0;
        }
    }
    let means: [f64; DIM] = std::array::from_fn(|i| sum[i] / count.max(1.0));
    let stds: [f64; DIM] = std::array::from_fn(|i| {
        let var = (sumsq[i] / count.max(1.0) - means[i] * means[i]).max(0.0);
        let s = var.sqrt();
        if s > 1e-12 {
            s
        } else {
            1.0 // zero-variance feature: weight is free, leave the scale alone
        }
    });

    // Difference vectors (standardized gold − standardized other), the
    // only thing the pairwise objective sees.
    let mut diffs: Vec<[f64; DIM]> = Vec::new();
    for inst in instances {
        let g = inst.gold.as_array();
        for other in &inst.others {
            let o = other.as_array();
            diffs.push(std::array::from_fn(|i| (g[i] - o[i]) / stds[i]));
        }
    }
    if diffs.is_empty() {
        return Err(Error::validation(
            "every instance is degenerate (no incorrect candidates); nothing to rank",
        ));
    }

    let n_pairs = diffs.len() as f64;
    let lambda = 1.0 / (c_param * n_pairs);
    let objective = |w: &[f64; DIM]| -> f64 {
        let reg = 0.5 * w.iter().map(|x| x * x).sum::<f64>();
        let hinge: f64 = diffs
            .iter()
            .map(|d| {
                let m: f64 = w.iter().zip(d).map(|(a, b)| a * b).sum();
                (1.0 - m).max(0.0)
            })
            .sum();
        reg + c_param * hinge
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    let mut w = [0.0; DIM];
    let mut best_w = w;
    let mut best_obj = objective(&w);
    let mut history = Vec::with_capacity(epochs);
    let mut t: u64 = 0;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let d = &diffs[i];
            let eta = 1.0 / (lambda * t as f64);
            let margin: f64 = w.iter().zip(d).map(|(a, b)| a * b).sum();
            let shrink = 1.0 - eta * lambda; // = 1 − 1/t
            for j in 0..DIM {
                w[j] *= shrink;
                if margin < 1.0 {
                    w[j] += eta * lambda * c_param * d[j];
                }
            }
        }
        let obj = objective(&w);
        if !obj.is_finite() {
            return Err(Error::Train(format!(
                "ranking objective diverged to {obj} after epoch {}",
                history.len() + 1
            )));
        }
        if obj < best_obj {
            best_obj = obj;
            best_w = w;
        }
        history.push(best_obj);
    }

    Ok(LinearRanker {
        weights: best_w,
        bias: 0.0,
        means,
        stds,
        c_param,
        seed,
        loss_history: history,
    })
}

/// Fraction of instances whose gold candidate outscores every other
/// candidate (ties count against the gold).
pub fn top1_accuracy(ranker: &LinearRanker, instances: &[RankingInstance]) -> f64 {
    if instances.is_empty() {
        return 0.0;
    }
    let correct = instances
        .iter()
        .filter(|inst| {
            let g = ranker.score(&inst.gold);
            inst.others.iter().all(|o| ranker.score(o) < g)
        })
        .count();
    correct as f64 / instances.len() as f64
}

/// Scores every candidate of `word` and returns the argmax; ties break
/// toward fewer segments, then the lexicographically earliest
/// split-point vector (the candidate order), biasing toward unsegmented
/// words.
pub fn segment_with_ranker(
    word: &str,
    ranker: &LinearRanker,
    inv: &AffixInventory,
    stats: &StatTables,
    lex: &LexiconSet,
) -> Segmentation {
    let set = generate_candidates(word, inv);
    let mut best: Option<(f64, usize, &Segmentation)> = None;
    for cand in set.candidates() {
        let score = ranker.score(&featurize(cand, stats, lex));
        let key = (score, cand.num_segments());
        let better = match &best {
            None => true,
            Some((bs, bn, _)) => score > *bs || (score == *bs && key.1 < *bn),
        };
        if better {
            best = Some((score, key.1, cand));
        }
    }
    best.map(|(_, _, c)| c.clone()).unwrap_or_else(|| Segmentation::unsegmented(word))
}
