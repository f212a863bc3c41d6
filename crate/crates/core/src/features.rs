//! Corpus statistics and the 11-feature vector scored for each candidate
//! segmentation.
//!
//! [`build_stats`] estimates affix-sequence and stem probabilities from
//! gold training segmentations; [`featurize`] turns one candidate into
//! the fixed feature vector the ranker consumes. Lexicon lookups
//! (gazetteer, function words, stem lexicon, stem templates) come from
//! pluggable word-list files; small illustrative lists ship with the
//! crate since the full resources are not redistributable.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::affixes::Segmentation;
use crate::error::{Error, Result};
use crate::textnorm::is_letter;

/// Canonical order and names of the feature components, used in model
/// archives and diagnostics.
pub const FEATURE_NAMES: [&str; 11] = [
    "prefix_cond",
    "suffix_cond",
    "prefix_given_suffix",
    "suffix_given_prefix",
    "stem_unigram",
    "stem_first_suffix_unigram",
    "valid_template",
    "in_gazetteer",
    "is_function_word",
    "in_lexicon",
    "stem_len_delta",
];

/// The 11 features of one candidate segmentation. The probability
/// features f1–f6 lie in [0, 1]; f7–f10 are 0/1 indicators; f11 is a
/// non-negative length in characters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    /// P(leading affix string is the prefix sequence); 1.0 with no prefixes.
    pub f1_prefix_cond: f64,
    /// P(trailing affix string is the suffix sequence); 1.0 with no suffixes.
    pub f2_suffix_cond: f64,
    /// P(prefix sequence | suffix sequence), marginal backoff when unseen.
    pub f3_prefix_given_suffix: f64,
    /// P(suffix sequence | prefix sequence), marginal backoff when unseen.
    pub f4_suffix_given_prefix: f64,
    /// Add-k smoothed stem unigram probability.
    pub f5_stem_unigram: f64,
    /// Add-k smoothed probability of stem + first suffix; f5 when no suffix.
    pub f6_stem_first_suffix_unigram: f64,
    /// Stem matches some template pattern.
    pub f7_valid_template: f64,
    /// Suffix-less stem appears in the gazetteer.
    pub f8_in_gazetteer: f64,
    /// Stem is a function word.
    pub f9_is_function_word: f64,
    /// Stem appears in the stem lexicon.
    pub f10_in_lexicon: f64,
    /// |stem length − average gold stem length|.
    pub f11_stem_len_delta: f64,
}

impl FeatureVector {
    pub const DIM: usize = 11;

    pub fn as_array(&self) -> [f64; Self::DIM] {
        [
            self.f1_prefix_cond,
            self.f2_suffix_cond,
            self.f3_prefix_given_suffix,
            self.f4_suffix_given_prefix,
            self.f5_stem_unigram,
            self.f6_stem_first_suffix_unigram,
            self.f7_valid_template,
            self.f8_in_gazetteer,
            self.f9_is_function_word,
            self.f10_in_lexicon,
            self.f11_stem_len_delta,
        ]
    }

    pub fn from_array(v: [f64; Self::DIM]) -> FeatureVector {
        FeatureVector {
            f1_prefix_cond: v[0],
            f2_suffix_cond: v[1],
            f3_prefix_given_suffix: v[2],
            f4_suffix_given_prefix: v[3],
            f5_stem_unigram: v[4],
            f6_stem_first_suffix_unigram: v[5],
            f7_valid_template: v[6],
            f8_in_gazetteer: v[7],
            f9_is_function_word: v[8],
            f10_in_lexicon: v[9],
            f11_stem_len_delta: v[10],
        }
    }
}

/// Word lists consulted by the indicator features. All sets are
/// duplicate-free; files are UTF-8, one entry per line, `#` comments.
#[derive(Debug, Clone, Default)]
pub struct LexiconSet {
    pub(crate) gazetteer: BTreeSet<String>,
    pub(crate) function_words: BTreeSet<String>,
    pub(crate) stem_lexicon: BTreeSet<String>,
    pub(crate) templates: BTreeSet<String>,
}

fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect()
}

fn load_word_list(path: &Path) -> Result<BTreeSet<String>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(parse_word_list(&text))
}

impl LexiconSet {
    /// All four sets empty; every indicator feature is then 0.
    pub fn empty() -> LexiconSet {
        LexiconSet::default()
    }

    /// The illustrative lists shipped under `data/lexicons/`.
    pub fn builtin() -> LexiconSet {
        LexiconSet {
            gazetteer: parse_word_list(include_str!("../data/lexicons/gazetteer.txt")),
            function_words: parse_word_list(include_str!("../data/lexicons/function_words.txt")),
            stem_lexicon: parse_word_list(include_str!("../data/lexicons/stems.txt")),
            templates: parse_word_list(include_str!("../data/lexicons/templates.txt")),
        }
    }

    /// Builds a set from in-memory lists (mostly for tests and small
    /// experiments).
    pub fn from_lists(
        gazetteer: &[&str],
        function_words: &[&str],
        stem_lexicon: &[&str],
        templates: &[&str],
    ) -> LexiconSet {
        let collect = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        LexiconSet {
            gazetteer: collect(gazetteer),
            function_words: collect(function_words),
            stem_lexicon: collect(stem_lexicon),
            templates: collect(templates),
        }
    }

    pub fn load_gazetteer(&mut self, path: &Path) -> Result<()> {
        self.gazetteer = load_word_list(path)?;
        Ok(())
    }

    pub fn load_function_words(&mut self, path: &Path) -> Result<()> {
        self.function_words = load_word_list(path)?;
        Ok(())
    }

    pub fn load_stem_lexicon(&mut self, path: &Path) -> Result<()> {
        self.stem_lexicon = load_word_list(path)?;
        Ok(())
    }

    pub fn load_templates(&mut self, path: &Path) -> Result<()> {
        self.templates = load_word_list(path)?;
        Ok(())
    }
}

/// True when the stem matches one of the template patterns. A template
/// is matched positionally against a stem of the same length: `C`
/// accepts any consonant (any letter except alef), other characters
/// must match exactly.
pub fn match_template(stem: &str, templates: &BTreeSet<String>) -> bool {
    let stem_chars: Vec<char> = stem.chars().collect();
    templates.iter().any(|t| {
        let tc: Vec<char> = t.chars().collect();
        tc.len() == stem_chars.len()
            && tc.iter().zip(&stem_chars).all(|(&pat, &c)| match pat {
                'C' => is_letter(c) && c != 'A' && c != 'ا',
                _ => pat == c,
            })
    })
}

/// Probability tables estimated from gold training segmentations.
///
/// Affix-sequence events are the *concatenated* prefix (or suffix)
/// strings of a word, with the empty string standing for "no affixes" in
/// the conditional tables. Unigram tables are add-k smoothed; the
/// conditionals back off to the corresponding marginal when a pair was
/// never observed.
#[derive(Debug, Clone, PartialEq)]
pub struct StatTables {
    /// leading string -> P(word's prefix sequence is exactly that string
    /// | word starts with it); only strings seen as gold prefix
    /// sequences are present, everything else has probability 0.
    pub(crate) prefix_seq_prob: BTreeMap<String, f64>,
    /// Trailing-string analogue for suffix sequences.
    pub(crate) suffix_seq_prob: BTreeMap<String, f64>,
    /// suffix seq -> prefix seq -> P(prefix seq | suffix seq).
    pub(crate) prefix_given_suffix: BTreeMap<String, BTreeMap<String, f64>>,
    /// prefix seq -> suffix seq -> P(suffix seq | prefix seq).
    pub(crate) suffix_given_prefix: BTreeMap<String, BTreeMap<String, f64>>,
    /// prefix seq -> P(prefix seq), the backoff for f3.
    pub(crate) prefix_seq_marginal: BTreeMap<String, f64>,
    /// suffix seq -> P(suffix seq), the backoff for f4.
    pub(crate) suffix_seq_marginal: BTreeMap<String, f64>,
    /// stem -> add-k smoothed probability (seen stems only).
    pub(crate) stem_unigram: BTreeMap<String, f64>,
    /// stem+first-suffix string -> add-k smoothed probability.
    pub(crate) stem_suffix_unigram: BTreeMap<String, f64>,
    pub(crate) stem_tokens: usize,
    pub(crate) stem_vocab: usize,
    pub(crate) stem_suffix_tokens: usize,
    pub(crate) stem_suffix_vocab: usize,
    pub(crate) avg_stem_len: f64,
    pub(crate) smoothing_k: f64,
}

impl StatTables {
    pub fn avg_stem_len(&self) -> f64 {
        self.avg_stem_len
    }

    pub fn smoothing_k(&self) -> f64 {
        self.smoothing_k
    }

    fn add_k(&self, count: f64, tokens: usize, vocab: usize) -> f64 {
        let denom = tokens as f64 + self.smoothing_k * vocab as f64;
        if denom > 0.0 {
            (count + self.smoothing_k) / denom
        } else {
            0.0
        }
    }

    /// Add-k smoothed stem unigram probability (f5).
    pub fn stem_prob(&self, stem: &str) -> f64 {
        self.stem_unigram
            .get(stem)
            .copied()
            .unwrap_or_else(|| self.add_k(0.0, self.stem_tokens, self.stem_vocab))
    }

    /// Add-k smoothed stem+first-suffix probability (f6).
    pub fn stem_suffix_prob(&self, s: &str) -> f64 {
        self.stem_suffix_unigram
            .get(s)
            .copied()
            .unwrap_or_else(|| self.add_k(0.0, self.stem_suffix_tokens, self.stem_suffix_vocab))
    }

    /// P(prefix sequence | suffix sequence), marginal backoff (f3).
    pub fn prefix_given_suffix(&self, prefix_seq: &str, suffix_seq: &str) -> f64 {
        match self.prefix_given_suffix.get(suffix_seq).and_then(|m| m.get(prefix_seq)) {
            Some(&v) => v,
            None => self.prefix_seq_marginal.get(prefix_seq).copied().unwrap_or(0.0),
        }
    }

    /// P(suffix sequence | prefix sequence), marginal backoff (f4).
    pub fn suffix_given_prefix(&self, suffix_seq: &str, prefix_seq: &str) -> f64 {
        match self.suffix_given_prefix.get(prefix_seq).and_then(|m| m.get(suffix_seq)) {
            Some(&v) => v,
            None => self.suffix_seq_marginal.get(suffix_seq).copied().unwrap_or(0.0),
        }
    }

    /// P(leading string is the whole prefix sequence), 0 when unseen (f1
    /// for a non-empty prefix list).
    pub fn leading_prefix_prob(&self, leading: &str) -> f64 {
        self.prefix_seq_prob.get(leading).copied().unwrap_or(0.0)
    }

    /// Trailing-string analogue (f2).
    pub fn trailing_suffix_prob(&self, trailing: &str) -> f64 {
        self.suffix_seq_prob.get(trailing).copied().unwrap_or(0.0)
    }
}

/// Estimates all tables from gold `(word, segmentation)` pairs with the
/// given add-k smoothing constant (0.01 is the shipped default).
pub fn build_stats(gold: &[(String, Segmentation)], smoothing_k: f64) -> Result<StatTables> {
    if gold.is_empty() {
        return Err(Error::validation("cannot build statistics from an empty corpus"));
    }
    if !smoothing_k.is_finite() || smoothing_k < 0.0 {
        return Err(Error::validation(format!(
            "smoothing constant must be finite and non-negative, got {smoothing_k}"
        )));
    }
    for (i, (word, seg)) in gold.iter().enumerate() {
        if seg.surface() != *word {
            return Err(Error::validation(format!(
                "entry {i}: segmentation {seg} does not concatenate to {word:?}"
            )));
        }
    }

    // How many words start (end) with each leading (trailing) string —
    // the denominators of the f1/f2 conditionals.
    let mut lead_den: BTreeMap<String, usize> = BTreeMap::new();
    let mut trail_den: BTreeMap<String, usize> = BTreeMap::new();
    for (word, _) in gold {
        let chars: Vec<char> = word.chars().collect();
        for i in 1..=chars.len() {
            *lead_den.entry(chars[..i].iter().collect()).or_insert(0) += 1;
            *trail_den.entry(chars[chars.len() - i..].iter().collect()).or_insert(0) += 1;
        }
    }

    let mut prefix_seq_count: BTreeMap<String, usize> = BTreeMap::new();
    let mut suffix_seq_count: BTreeMap<String, usize> = BTreeMap::new();
    let mut pair_count: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut stem_count: BTreeMap<String, usize> = BTreeMap::new();
    let mut stem_suffix_count: BTreeMap<String, usize> = BTreeMap::new();
    let mut stem_len_sum = 0usize;
    for (_, seg) in gold {
        let pseq = seg.prefixes().concat();
        let sseq = seg.suffixes().concat();
        *prefix_seq_count.entry(pseq.clone()).or_insert(0) += 1;
        *suffix_seq_count.entry(sseq.clone()).or_insert(0) += 1;
        *pair_count.entry((pseq, sseq)).or_insert(0) += 1;
        *stem_count.entry(seg.stem().to_string()).or_insert(0) += 1;
        if let Some(first) = seg.suffixes().first() {
            *stem_suffix_count.entry(format!("{}{}", seg.stem(), first)).or_insert(0) += 1;
        }
        stem_len_sum += seg.stem().chars().count();
    }

    let n = gold.len() as f64;
    let mut tables = StatTables {
        prefix_seq_prob: BTreeMap::new(),
        suffix_seq_prob: BTreeMap::new(),
        prefix_given_suffix: BTreeMap::new(),
        suffix_given_prefix: BTreeMap::new(),
        prefix_seq_marginal: prefix_seq_count
            .iter()
            .map(|(k, &c)| (k.clone(), c as f64 / n))
            .collect(),
        suffix_seq_marginal: suffix_seq_count
            .iter()
            .map(|(k, &c)| (k.clone(), c as f64 / n))
            .collect(),
        stem_unigram: BTreeMap::new(),
        stem_suffix_unigram: BTreeMap::new(),
        stem_tokens: gold.len(),
        stem_vocab: stem_count.len(),
        stem_suffix_tokens: stem_suffix_count.values().sum(),
        stem_suffix_vocab: stem_suffix_count.len(),
        avg_stem_len: stem_len_sum as f64 / n,
        smoothing_k,
    };
    for (p, &c) in &prefix_seq_count {
        if !p.is_empty() {
            tables.prefix_seq_prob.insert(p.clone(), c as f64 / lead_den[p] as f64);
        }
    }
    for (s, &c) in &suffix_seq_count {
        if !s.is_empty() {
            tables.suffix_seq_prob.insert(s.clone(), c as f64 / trail_den[s] as f64);
        }
    }
    for ((p, s), &c) in &pair_count {
        tables
            .prefix_given_suffix
            .entry(s.clone())
            .or_default()
            .insert(p.clone(), c as f64 / suffix_seq_count[s] as f64);
        tables
            .suffix_given_prefix
            .entry(p.clone())
            .or_default()
            .insert(s.clone(), c as f64 / prefix_seq_count[p] as f64);
    }
    for (stem, &c) in &stem_count {
        let prob = tables.add_k(c as f64, tables.stem_tokens, tables.stem_vocab);
        tables.stem_unigram.insert(stem.clone(), prob);
    }
    for (key, &c) in &stem_suffix_count {
        let prob = tables.add_k(c as f64, tables.stem_suffix_tokens, tables.stem_suffix_vocab);
        tables.stem_suffix_unigram.insert(key.clone(), prob);
    }
    Ok(tables)
}

/// Computes the 11 features of one candidate against the statistics and
/// lexicons. Pure and total: unseen events get their smoothed or
/// backed-off probabilities.
pub fn featurize(cand: &Segmentation, stats: &StatTables, lex: &LexiconSet) -> FeatureVector {
    let pseq = cand.prefixes().concat();
    let sseq = cand.suffixes().concat();
    let stem = cand.stem();
    let on = |b: bool| if b { 1.0 } else { 0.0 };

    let f5 = stats.stem_prob(stem);
    FeatureVector {
        f1_prefix_cond: if pseq.is_empty() { 1.0 } else { stats.leading_prefix_prob(&pseq) },
        f2_suffix_cond: if sseq.is_empty() { 1.0 } else { stats.trailing_suffix_prob(&sseq) },
        f3_prefix_given_suffix: stats.prefix_given_suffix(&pseq, &sseq),
        f4_suffix_given_prefix: stats.suffix_given_prefix(&sseq, &pseq),
        f5_stem_unigram: f5,
        f6_stem_first_suffix_unigram: match cand.suffixes().first() {
            Some(first) => stats.stem_suffix_prob(&format!("{stem}{first}")),
            None => f5,
        },
        f7_valid_template: on(match_template(stem, &lex.templates)),
        f8_in_gazetteer: on(cand.suffixes().is_empty() && lex.gazetteer.contains(stem)),
        f9_is_function_word: on(lex.function_words.contains(stem)),
        f10_in_lexicon: on(lex.stem_lexicon.contains(stem)),
        f11_stem_len_delta: (stem.chars().count() as f64 - stats.avg_stem_len).abs(),
    }
}
