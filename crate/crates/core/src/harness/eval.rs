//! Scoring segmenter output against a gold corpus.
//!
//! The headline metric is exact-match word accuracy: a word counts as
//! correct only when its full segment sequence equals the gold one.
//! Alongside it the report tallies a small error taxonomy — heuristic
//! symptom counts over the mis-segmented words, meant for reading, not
//! for optimizing — and, when a training corpus is supplied, the
//! fraction of evaluated words that were seen in training (the
//! memorization floor a pure lookup would reach).
//!
//! [`coda_match_stat`] is the companion statistic for spelling
//! normalization studies: across two aligned corpora (say raw spellings
//! and their conventionalized rewrites) it measures how often the two
//! segmentations agree, optionally after folding both sides with the
//! matching table.

use std::collections::BTreeSet;
use std::fmt;

use crate::affixes::Segmentation;
use crate::error::{Error, Result};
use crate::harness::corpus::Corpus;
use crate::textnorm::{is_arabic_letter, normalize_matching, reduce_elongation};

/// Symptom counts over mis-segmented words. The rules are heuristic
/// pattern checks and a single word may show several symptoms (or, for
/// a plain stem/affix confusion with no other mark, exactly one), so
/// the counts are diagnostics rather than a partition of the errors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorBuckets {
    /// Output has more segments than gold.
    pub over_split: usize,
    /// Output has fewer segments than gold.
    pub under_split: usize,
    /// Same segment count, different cut positions.
    pub stem_errors: usize,
    /// The word contains characters outside the Arabic alphabet
    /// (digits, Latin letters with no Buckwalter reading, symbols).
    pub non_arabic: usize,
    /// Gold has four or more segments.
    pub long_words: usize,
    /// Some gold boundary sits between two identical letters, the
    /// shared-letter/gemination pattern that makes the cut ambiguous.
    pub boundary_share: usize,
    /// The spelling is elongated: collapsing letter runs changes it.
    pub unconventional: usize,
}

impl ErrorBuckets {
    /// `(record key, human label, count)` for every bucket, in a fixed
    /// order shared by the two output formats.
    pub fn fields(&self) -> [(&'static str, &'static str, usize); 7] {
        [
            ("over_split", "over-split", self.over_split),
            ("under_split", "under-split", self.under_split),
            ("stem_errors", "stem boundary", self.stem_errors),
            ("non_arabic", "non-Arabic spelling", self.non_arabic),
            ("long_words", "4+ segments", self.long_words),
            ("boundary_share", "shared boundary letter", self.boundary_share),
            ("unconventional", "elongated spelling", self.unconventional),
        ]
    }

    fn tally(&mut self, output: &Segmentation, gold: &Segmentation) {
        use std::cmp::Ordering;
        match output.num_segments().cmp(&gold.num_segments()) {
            Ordering::Greater => self.over_split += 1,
            Ordering::Less => self.under_split += 1,
            Ordering::Equal => self.stem_errors += 1,
        }
        let surface = gold.surface();
        if surface.chars().any(|c| !is_arabic_letter(c)) {
            self.non_arabic += 1;
        }
        if gold.num_segments() >= 4 {
            self.long_words += 1;
        }
        let chars: Vec<char> = surface.chars().collect();
        if gold.split_points().iter().any(|&p| chars[p - 1] == chars[p]) {
            self.boundary_share += 1;
        }
        if reduce_elongation(&surface) != surface {
            self.unconventional += 1;
        }
    }
}

/// The result of scoring one system run against one gold corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// `correct / evaluated`.
    pub word_accuracy: f64,
    /// Number of gold word tokens scored.
    pub evaluated: usize,
    /// Words whose output segmentation matches gold exactly.
    pub correct: usize,
    /// Non-word tokens in the gold corpus, excluded from scoring.
    pub pass_through: usize,
    /// Fraction of evaluated words whose surface occurs as a word in
    /// the training corpus; `None` when no training corpus was given.
    pub seen_rate: Option<f64>,
    pub buckets: ErrorBuckets,
}

impl EvalReport {
    /// Machine-readable rendering: one `key=value` line per field, in a
    /// fixed order. Absent seen rate prints as `seen_rate=none`.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("word_accuracy={}\n", self.word_accuracy));
        out.push_str(&format!("evaluated={}\n", self.evaluated));
        out.push_str(&format!("correct={}\n", self.correct));
        out.push_str(&format!("pass_through={}\n", self.pass_through));
        match self.seen_rate {
            Some(rate) => out.push_str(&format!("seen_rate={rate}\n")),
            None => out.push_str("seen_rate=none\n"),
        }
        for (key, _, count) in self.buckets.fields() {
            out.push_str(&format!("bucket_{key}={count}\n"));
        }
        out
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "word accuracy     {:.4}  ({}/{} words exact, {} pass-through tokens skipped)",
            self.word_accuracy, self.correct, self.evaluated, self.pass_through
        )?;
        match self.seen_rate {
            Some(rate) => writeln!(f, "seen in training  {rate:.4}")?,
            None => writeln!(f, "seen in training  n/a (no training corpus given)")?,
        }
        writeln!(f, "error symptoms (a word may show several)")?;
        for (_, label, count) in self.buckets.fields() {
            writeln!(f, "  {label:<24}{count:>5}")?;
        }
        Ok(())
    }
}

/// Scores `outputs` against the word tokens of `gold`, in corpus order.
///
/// `outputs` must align one-to-one with the gold word tokens (pass-through
/// tokens have no output) and each output must spell the same Buckwalter
/// surface as its gold word; either violation is an error, as is a gold
/// corpus with no word tokens at all. `training`, when given, supplies
/// the seen-in-training rate.
pub fn evaluate(
    outputs: &[Segmentation],
    gold: &Corpus,
    training: Option<&Corpus>,
) -> Result<EvalReport> {
    let gold_words: Vec<&Segmentation> = gold
        .tweets()
        .iter()
        .flat_map(|t| t.tokens.iter().filter(|tok| tok.is_word()).map(|tok| tok.gold()))
        .collect();
    if outputs.len() != gold_words.len() {
        return Err(Error::validation(format!(
            "{} outputs for {} gold word tokens",
            outputs.len(),
            gold_words.len()
        )));
    }
    if gold_words.is_empty() {
        return Err(Error::validation("gold corpus has no word tokens to evaluate"));
    }
    let seen_set: Option<BTreeSet<String>> =
        training.map(|c| c.gold_words().into_iter().map(|(word, _)| word).collect());

    let mut correct = 0usize;
    let mut seen = 0usize;
    let mut buckets = ErrorBuckets::default();
    for (i, (output, gold_seg)) in outputs.iter().zip(&gold_words).enumerate() {
        let surface = gold_seg.surface();
        if output.surface() != surface {
            return Err(Error::validation(format!(
                "output {} spells {:?} but the aligned gold word is {:?}",
                i + 1,
                output.surface(),
                surface
            )));
        }
        if let Some(set) = &seen_set {
            if set.contains(&surface) {
                seen += 1;
            }
        }
        if output.same_split(gold_seg) {
            correct += 1;
        } else {
            buckets.tally(output, gold_seg);
        }
    }

    let evaluated = gold_words.len();
    let total_tokens: usize = gold.tweets().iter().map(|t| t.tokens.len()).sum();
    Ok(EvalReport {
        word_accuracy: correct as f64 / evaluated as f64,
        evaluated,
        correct,
        pass_through: total_tokens - evaluated,
        seen_rate: seen_set.map(|_| seen as f64 / evaluated as f64),
        buckets,
    })
}

/// Fraction of aligned word tokens whose segmentations agree exactly
/// across two corpora, e.g. raw spellings against their conventionalized
/// rewrites. With `use_matching` both sides' segments are folded by the
/// matching table first, so the statistic can only rise: folding is
/// many-to-one, and equal segments stay equal under any function.
///
/// The corpora must align tweet-by-tweet and token-by-token, with words
/// facing words; surfaces may differ (that is the point). Errors on any
/// misalignment and on corpora with no word tokens.
pub fn coda_match_stat(raw: &Corpus, coda: &Corpus, use_matching: bool) -> Result<f64> {
    if raw.len() != coda.len() {
        return Err(Error::validation(format!(
            "corpora are not aligned: {} tweets vs {}",
            raw.len(),
            coda.len()
        )));
    }
    let mut compared = 0usize;
    let mut matched = 0usize;
    for (ti, (rt, ct)) in raw.tweets().iter().zip(coda.tweets()).enumerate() {
        if rt.tokens.len() != ct.tokens.len() {
            return Err(Error::validation(format!(
                "tweet {}: {} tokens vs {}",
                ti + 1,
                rt.tokens.len(),
                ct.tokens.len()
            )));
        }
        for (wi, (rtok, ctok)) in rt.tokens.iter().zip(&ct.tokens).enumerate() {
            if rtok.is_word() != ctok.is_word() {
                return Err(Error::validation(format!(
                    "tweet {} token {}: word aligned against pass-through",
                    ti + 1,
                    wi + 1
                )));
            }
            if !rtok.is_word() {
                continue;
            }
            compared += 1;
            let same = if use_matching {
                let fold = |seg: &Segmentation| -> Vec<String> {
                    seg.pieces().iter().map(|p| normalize_matching(p)).collect()
                };
                fold(rtok.gold()) == fold(ctok.gold())
            } else {
                rtok.gold().pieces() == ctok.gold().pieces()
            };
            if same {
                matched += 1;
            }
        }
    }
    if compared == 0 {
        return Err(Error::validation("no aligned word tokens to compare"));
    }
    Ok(matched as f64 / compared as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::corpus::parse_corpus;
    use proptest::prelude::*;

    fn corpus(body: &str) -> Corpus {
        let text = format!("#dialect=egyptian\n#script=buckwalter\n{body}");
        parse_corpus(&text, "test").unwrap()
    }

    /// Builds a segmentation from pieces with the given stem position,
    /// bypassing any inventory (roles don't matter to the scorer).
    fn seg(pieces: &[&str], stem: usize) -> Segmentation {
        Segmentation::new(
            pieces[..stem].iter().map(|s| s.to_string()).collect(),
            pieces[stem].to_string(),
            pieces[stem + 1..].iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn three_of_four_words_score_three_quarters() {
        let gold = corpus("w+mn hnAk @user1\nb+yqwl+k m+b+lEb+$\n");
        let outputs = vec![
            seg(&["w", "mn"], 1),
            seg(&["hnAk"], 0),
            seg(&["byqwl", "k"], 0), // wrong: gold cuts b+yqwl+k
            seg(&["m", "b", "lEb", "$"], 2),
        ];
        let report = evaluate(&outputs, &gold, None).unwrap();
        assert_eq!(report.word_accuracy, 0.75);
        assert_eq!((report.correct, report.evaluated, report.pass_through), (3, 4, 1));
        assert_eq!(report.seen_rate, None);
        assert_eq!(report.buckets.under_split, 1);
        assert_eq!(report.buckets.over_split, 0);
    }

    #[test]
    fn misalignment_is_an_error() {
        let gold = corpus("w+mn hnAk\n");
        let too_few = evaluate(&[seg(&["w", "mn"], 1)], &gold, None).unwrap_err();
        assert!(too_few.to_string().contains("1 outputs for 2"));
        let wrong_surface = evaluate(
            &[seg(&["w", "mn"], 1), seg(&["hnAAk"], 0)],
            &gold,
            None,
        )
        .unwrap_err();
        assert!(wrong_surface.to_string().contains("\"hnAAk\""));
        let empty = corpus("@user1 !\n");
        assert!(evaluate(&[], &empty, None).is_err());
    }

    #[test]
    fn seen_rate_counts_training_occurrences() {
        let gold = corpus("w+mn hnAk\nqlb+h ktAb\n");
        let train = corpus("w+mn ygry\nhnAk\n");
        let outputs: Vec<Segmentation> =
            gold.gold_words().into_iter().map(|(_, s)| s).collect();
        let report = evaluate(&outputs, &gold, Some(&train)).unwrap();
        assert_eq!(report.word_accuracy, 1.0);
        // w+mn and hnAk occur in training; qlbh and ktAb don't.
        assert_eq!(report.seen_rate, Some(0.5));
    }

    #[test]
    fn buckets_follow_their_pattern_rules() {
        let gold = corpus("Al+lEb w+b+qlb+nA E+Al mbrwwwk qlb1\n");
        let outputs = vec![
            seg(&["AllEb"], 0),          // under-split + shared boundary letter
            seg(&["wb", "qlbnA"], 0),    // under-split + 4-segment gold
            seg(&["EA", "l"], 0),        // same count, moved cut
            seg(&["m", "brwwwk"], 1),    // over-split + elongated spelling
            seg(&["q", "lb1"], 1),       // over-split + non-Arabic character
        ];
        let report = evaluate(&outputs, &gold, None).unwrap();
        assert_eq!(report.word_accuracy, 0.0);
        let b = report.buckets;
        assert_eq!(
            (b.over_split, b.under_split, b.stem_errors),
            (2, 2, 1),
            "{b:?}"
        );
        assert_eq!(b.non_arabic, 1);
        assert_eq!(b.long_words, 1);
        assert_eq!(b.boundary_share, 1);
        assert_eq!(b.unconventional, 1);
    }

    #[test]
    fn report_is_invariant_under_tweet_permutation() {
        let gold = corpus("w+mn hnAk\nqlb+h\nktAb b+yqwl+k\n");
        let train = corpus("hnAk qlb+h\n");
        let outputs = vec![
            seg(&["w", "mn"], 1),
            seg(&["hnAk"], 0),
            seg(&["qlbh"], 0), // wrong
            seg(&["ktAb"], 0),
            seg(&["b", "yqwl", "k"], 1),
        ];
        let base = evaluate(&outputs, &gold, Some(&train)).unwrap();

        let perm = [2usize, 0, 1];
        let shuffled_gold = gold.subset(&perm);
        // Word counts per tweet: tweet 0 -> 2 words, tweet 1 -> 1, tweet 2 -> 2.
        let shuffled_outputs = vec![
            outputs[3].clone(),
            outputs[4].clone(),
            outputs[0].clone(),
            outputs[1].clone(),
            outputs[2].clone(),
        ];
        let permuted = evaluate(&shuffled_outputs, &shuffled_gold, Some(&train)).unwrap();
        assert_eq!(base, permuted);
    }

    #[test]
    fn both_renderings_carry_every_field() {
        let gold = corpus("w+mn hnAk\n");
        let outputs = vec![seg(&["wm", "n"], 0), seg(&["hnAk"], 0)];
        let report = evaluate(&outputs, &gold, Some(&gold)).unwrap();
        let record = report.to_record();
        assert!(record.contains("word_accuracy=0.5\n"));
        assert!(record.contains("seen_rate=1\n"));
        assert!(record.contains("bucket_stem_errors=1\n"));
        let human = report.to_string();
        assert!(human.contains("word accuracy     0.5000"));
        assert!(human.contains("stem boundary"));
        let no_train = evaluate(&outputs, &gold, None).unwrap();
        assert!(no_train.to_record().contains("seen_rate=none\n"));
    }

    #[test]
    fn identical_corpora_match_fully() {
        let c = corpus("w+mn hnAk @user1\nb+yqwl+k\n");
        assert_eq!(coda_match_stat(&c, &c, false).unwrap(), 1.0);
        assert_eq!(coda_match_stat(&c, &c, true).unwrap(), 1.0);
    }

    #[test]
    fn two_token_toy_matches_half() {
        let raw = corpus("w+mn byqwl+k\n");
        let coda = corpus("w+mn b+yqwlk\n");
        assert_eq!(coda_match_stat(&raw, &coda, false).unwrap(), 0.5);
    }

    #[test]
    fn matching_folds_variant_spellings_together() {
        // Raw spells with hamza-above alef and ta marbuta; the rewrite
        // uses bare alef and ha. Segmentations agree only once folded.
        let raw = corpus(">nA qlb+p\n");
        let coda = corpus("AnA qlb+h\n");
        assert_eq!(coda_match_stat(&raw, &coda, false).unwrap(), 0.0);
        assert_eq!(coda_match_stat(&raw, &coda, true).unwrap(), 1.0);
    }

    #[test]
    fn misaligned_corpora_are_rejected() {
        let a = corpus("w+mn hnAk\n");
        let b = corpus("w+mn hnAk\nqlb\n");
        assert!(coda_match_stat(&a, &b, false).unwrap_err().to_string().contains("1 tweets vs 2"));
        let c = corpus("w+mn\n");
        assert!(coda_match_stat(&a, &c, false).unwrap_err().to_string().contains("tokens"));
        let d = corpus("w+mn @user\n");
        assert!(coda_match_stat(&a, &d, false)
            .unwrap_err()
            .to_string()
            .contains("pass-through"));
        let e = corpus("@user\n");
        assert!(coda_match_stat(&e, &e, false).is_err());
    }

    proptest! {
        /// Folding is many-to-one, so switching the matching table on can
        /// only raise the agreement statistic, whatever the corpora are.
        #[test]
        fn matching_never_lowers_the_statistic(seed in 0u64..300) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            // Letters chosen so random substitution often crosses a
            // matching fold (> vs A, Y vs y, p vs h) and often doesn't.
            let letters = ['q', 'l', 'b', '>', 'A', 'Y', 'y', 'p', 'h'];
            let word = |rng: &mut rand_chacha::ChaCha8Rng| -> String {
                let pieces: Vec<String> = (0..rng.gen_range(1..=3))
                    .map(|_| {
                        (0..rng.gen_range(1..=3))
                            .map(|_| letters[rng.gen_range(0..letters.len())])
                            .collect()
                    })
                    .collect();
                pieces.join("+")
            };
            let n = rng.gen_range(1..=12);
            let mut raw_line = Vec::new();
            let mut coda_line = Vec::new();
            for _ in 0..n {
                let w = word(&mut rng);
                raw_line.push(w.clone());
                if rng.gen_bool(0.5) {
                    // Same split, per-character variant substitutions.
                    let swapped: String = w
                        .chars()
                        .map(|c| match c {
                            '>' if rng.gen_bool(0.5) => 'A',
                            'A' if rng.gen_bool(0.5) => '>',
                            'Y' if rng.gen_bool(0.5) => 'y',
                            'y' if rng.gen_bool(0.5) => 'Y',
                            'p' if rng.gen_bool(0.5) => 'h',
                            'h' if rng.gen_bool(0.5) => 'p',
                            other => other,
                        })
                        .collect();
                    coda_line.push(swapped);
                } else {
                    coda_line.push(word(&mut rng));
                }
            }
            let raw = corpus(&format!("{}\n", raw_line.join(" ")));
            let coda = corpus(&format!("{}\n", coda_line.join(" ")));
            let plain = coda_match_stat(&raw, &coda, false).unwrap();
            let folded = coda_match_stat(&raw, &coda, true).unwrap();
            prop_assert!(folded >= plain, "folded {folded} < plain {plain}");
            prop_assert!((0.0..=1.0).contains(&folded));
        }
    }
}
