//! k-fold cross-validation of both segmenters under the three lookup
//! schemes — the full comparison grid this toolkit exists to produce.
//!
//! Each fold trains a fresh ranker and a fresh tagger on its train
//! split, builds an exact-match lookup table from the same split (plus
//! an optional MSA corpus), segments the test split once per system,
//! and scores every (system, scheme) cell by exact-match word accuracy.
//! Everything is seeded and single-threaded, so a configuration renders
//! to a byte-identical report on every run.

use std::collections::BTreeMap;
use std::fmt;

use crate::affixes::{AffixInventory, Segmentation};
use crate::error::{Error, Result};
use crate::features::{build_stats, LexiconSet};
use crate::harness::corpus::Corpus;
use crate::harness::eval::evaluate;
use crate::harness::folds::{split_folds, FoldPlan};
use crate::lookup::{LookupTable, Scheme};
use crate::neural::{tag_words, train_tagger, Hyperparams};
use crate::ranker::{ranking_instances, segment_with_ranker, train_ranker};

/// The two trainable segmenters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SystemKind {
    /// Pairwise-trained linear ranker over exhaustive affix splits.
    Ranker,
    /// Character-level recurrent tagger with a CRF output layer.
    Tagger,
}

impl SystemKind {
    pub const ALL: [SystemKind; 2] = [SystemKind::Ranker, SystemKind::Tagger];
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemKind::Ranker => "ranker",
            SystemKind::Tagger => "tagger",
        })
    }
}

/// Everything a cross-validation run needs besides the data.
#[derive(Debug, Clone)]
pub struct CrossvalConfig {
    /// Number of folds.
    pub k: usize,
    /// Master seed: drives the fold shuffle directly and each fold's
    /// training as `seed + fold index`.
    pub seed: u64,
    /// Ranker regularization trade-off.
    pub c_param: f64,
    /// Ranker training epochs.
    pub ranker_epochs: usize,
    /// Tagger configuration (its `seed` field is overridden per fold).
    pub hp: Hyperparams,
    /// Fold lookup keys with Matching normalization. Off by default:
    /// exact keys keep a table hit exactly as annotated.
    pub normalize_keys: bool,
    /// Add-k smoothing for the ranker's statistic tables.
    pub smoothing: f64,
}

impl Default for CrossvalConfig {
    fn default() -> CrossvalConfig {
        CrossvalConfig {
            k: 5,
            seed: 0,
            c_param: crate::ranker::DEFAULT_C,
            ranker_epochs: crate::ranker::DEFAULT_EPOCHS,
            hp: Hyperparams::default(),
            normalize_keys: false,
            smoothing: 0.01,
        }
    }
}

/// Per-fold accuracies for every grid cell, plus the rendered report.
#[derive(Debug, Clone)]
pub struct CrossvalResults {
    plan: FoldPlan,
    /// `(system, scheme)` → one accuracy per fold, in fold order.
    scores: BTreeMap<(SystemKind, Scheme), Vec<f64>>,
    /// Fraction of each fold's test words seen in its train split.
    seen_rates: Vec<f64>,
    report: String,
}

impl CrossvalResults {
    pub fn plan(&self) -> &FoldPlan {
        &self.plan
    }

    /// Per-fold accuracies for one grid cell.
    pub fn accuracies(&self, system: SystemKind, scheme: Scheme) -> &[f64] {
        &self.scores[&(system, scheme)]
    }

    /// Mean accuracy of one grid cell over the folds.
    pub fn mean_accuracy(&self, system: SystemKind, scheme: Scheme) -> f64 {
        mean(self.accuracies(system, scheme))
    }

    pub fn seen_rates(&self) -> &[f64] {
        &self.seen_rates
    }

    /// The full grid as deterministic, fixed-width text.
    pub fn report(&self) -> &str {
        &self.report
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// One accuracy as a percent cell, two decimals, eight columns.
fn cell(x: f64) -> String {
    format!("{:>8.2}", 100.0 * x)
}

/// Runs the grid: for every fold, trains both systems on the train
/// split (dev steers the tagger's early stopping) and scores the test
/// split under each scheme. `msa` feeds the DA+MSA scheme's second
/// lookup map and is used whole — it is external data, not part of the
/// folds. Scheme `none` is the bare model; `da` overlays the train-split
/// lookup table; `da+msa` overlays both tables.
pub fn crossval(
    corpus: &Corpus,
    inv: &AffixInventory,
    msa: Option<&Corpus>,
    cfg: &CrossvalConfig,
) -> Result<CrossvalResults> {
    let plan = split_folds(corpus.len(), cfg.k, cfg.seed)?;
    let msa_pairs: Option<Vec<(String, Segmentation)>> = msa.map(|c| c.gold_words());
    let lex = LexiconSet::builtin();

    let mut scores: BTreeMap<(SystemKind, Scheme), Vec<f64>> = BTreeMap::new();
    let mut seen_rates = Vec::with_capacity(cfg.k);
    for (f, fold) in plan.folds().iter().enumerate() {
        let fold_seed = cfg.seed.wrapping_add(f as u64);
        let train_c = corpus.subset(&fold.train);
        let dev_c = corpus.subset(&fold.dev);
        let test_c = corpus.subset(&fold.test);
        let train_pairs = train_c.gold_words();
        if train_pairs.is_empty() {
            return Err(Error::validation(format!(
                "fold {}: train split has no word tokens",
                f + 1
            )));
        }

        let stats = build_stats(&train_pairs, cfg.smoothing)?;
        let (instances, _oov) = ranking_instances(&train_pairs, inv, &stats, &lex)?;
        let ranker = train_ranker(&instances, cfg.c_param, cfg.ranker_epochs, fold_seed)?;

        let mut hp = cfg.hp.clone();
        hp.seed = fold_seed;
        let (tagger, _log) =
            train_tagger(&train_c.tweet_word_pairs(), &dev_c.tweet_word_pairs(), inv, &hp)?;

        let (table, _conflicts) =
            LookupTable::build(&train_pairs, msa_pairs.as_deref(), cfg.normalize_keys)?;

        // Model outputs once per system; schemes only overlay lookups.
        let test_tweets = test_c.tweet_word_pairs();
        let mut model_out: BTreeMap<SystemKind, Vec<Segmentation>> = BTreeMap::new();
        let ranker_out: Vec<Segmentation> = test_tweets
            .iter()
            .flatten()
            .map(|(word, _)| segment_with_ranker(word, &ranker, inv, &stats, &lex))
            .collect();
        model_out.insert(SystemKind::Ranker, ranker_out);
        let tagger_out: Vec<Segmentation> = test_tweets
            .iter()
            .map(|tweet| {
                let words: Vec<String> = tweet.iter().map(|(w, _)| w.clone()).collect();
                tag_words(&tagger, &words, inv)
            })
            .collect::<Vec<_>>()
            .concat();
        model_out.insert(SystemKind::Tagger, tagger_out);

        let test_words: Vec<&String> =
            test_tweets.iter().flatten().map(|(word, _)| word).collect();
        for system in SystemKind::ALL {
            for scheme in Scheme::ALL {
                let outputs: Vec<Segmentation> = test_words
                    .iter()
                    .zip(&model_out[&system])
                    .map(|(word, fallback)| {
                        table.resolve(word, scheme, |_| fallback.clone())
                    })
                    .collect();
                let report = evaluate(&outputs, &test_c, Some(&train_c))?;
                scores.entry((system, scheme)).or_default().push(report.word_accuracy);
                if system == SystemKind::Ranker && scheme == Scheme::None {
                    seen_rates
                        .push(report.seen_rate.expect("training corpus was supplied"));
                }
            }
        }
    }

    let report = render_report(corpus, msa, cfg, &plan, &scores, &seen_rates);
    Ok(CrossvalResults { plan, scores, seen_rates, report })
}

fn render_report(
    corpus: &Corpus,
    msa: Option<&Corpus>,
    cfg: &CrossvalConfig,
    plan: &FoldPlan,
    scores: &BTreeMap<(SystemKind, Scheme), Vec<f64>>,
    seen_rates: &[f64],
) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "cross-validation  dialect={}  tweets={}  words={}  k={}  seed={}\n",
        corpus.dialect(),
        corpus.len(),
        corpus.word_count(),
        plan.k(),
        cfg.seed,
    ));
    if let Some(msa) = msa {
        out.push_str(&format!("msa corpus        words={}\n", msa.word_count()));
    }
    out.push_str(&format!("\nmean word accuracy (%) over {} folds\n", plan.k()));
    out.push_str(&format!("{:<8}{:>8}{:>8}{:>8}\n", "system", "none", "da", "da+msa"));
    for system in SystemKind::ALL {
        out.push_str(&format!("{system:<8}"));
        for scheme in Scheme::ALL {
            out.push_str(&cell(mean(&scores[&(system, scheme)])));
        }
        out.push('\n');
    }
    out.push_str(&format!("mean seen-in-training (%): {:.2}\n", 100.0 * mean(seen_rates)));

    out.push_str("\nper-fold word accuracy (%)\n");
    out.push_str(&format!(
        "{:>4}  {:<8}{:>8}{:>8}{:>8}{:>8}\n",
        "fold", "system", "none", "da", "da+msa", "seen"
    ));
    for f in 0..plan.k() {
        for system in SystemKind::ALL {
            out.push_str(&format!("{:>4}  {system:<8}", f + 1));
            for scheme in Scheme::ALL {
                out.push_str(&cell(scores[&(system, scheme)][f]));
            }
            out.push_str(&cell(seen_rates[f]));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::synth::{generate_synthetic_corpus, Grammar};

    /// A fast configuration: tiny tagger, few epochs. Model quality is
    /// beside the point for these tests.
    fn quick_cfg(k: usize, seed: u64) -> CrossvalConfig {
        CrossvalConfig {
            k,
            seed,
            ranker_epochs: 10,
            hp: Hyperparams {
                d: 6,
                h: 8,
                max_epochs: 2,
                patience: 1,
                batch_size: 8,
                ..Hyperparams::default()
            },
            ..CrossvalConfig::default()
        }
    }

    #[test]
    fn grid_runs_and_lookup_schemes_never_hurt() {
        let grammar = Grammar::builtin();
        let corpus = generate_synthetic_corpus(grammar, 260, 31).unwrap();
        let msa = generate_synthetic_corpus(grammar, 200, 32).unwrap();
        let inv = grammar.inventory();
        let cfg = quick_cfg(3, 5);
        let results = crossval(&corpus, &inv, Some(&msa), &cfg).unwrap();

        assert_eq!(results.seen_rates().len(), 3);
        for system in SystemKind::ALL {
            for scheme in Scheme::ALL {
                let accs = results.accuracies(system, scheme);
                assert_eq!(accs.len(), 3);
                assert!(accs.iter().all(|a| (0.0..=1.0).contains(a)));
            }
            // The builtin grammar never reuses a surface for two golds,
            // and the tables use exact keys, so every table hit is
            // correct: overlaying lookups cannot lower any fold.
            for f in 0..3 {
                let none = results.accuracies(system, Scheme::None)[f];
                let da = results.accuracies(system, Scheme::Da)[f];
                let da_msa = results.accuracies(system, Scheme::DaMsa)[f];
                assert!(da_msa >= da && da >= none, "{system} fold {f}: {none} {da} {da_msa}");
                // Table hits alone already cover the seen words.
                assert!(da >= results.seen_rates()[f]);
            }
        }
        let report = results.report();
        assert!(report.contains("mean word accuracy (%) over 3 folds"));
        assert!(report.contains("ranker") && report.contains("tagger"));
        assert!(report.contains("msa corpus        words=200"));
    }

    #[test]
    fn same_configuration_renders_identical_reports() {
        let grammar = Grammar::builtin();
        let corpus = generate_synthetic_corpus(grammar, 150, 77).unwrap();
        let inv = grammar.inventory();
        let cfg = quick_cfg(3, 11);
        let first = crossval(&corpus, &inv, None, &cfg).unwrap();
        let second = crossval(&corpus, &inv, None, &cfg).unwrap();
        assert_eq!(first.report(), second.report());
        assert!(!first.report().contains("msa corpus"));
        let other_seed = crossval(&corpus, &inv, None, &quick_cfg(3, 12)).unwrap();
        assert_ne!(first.report(), other_seed.report());
    }
}
