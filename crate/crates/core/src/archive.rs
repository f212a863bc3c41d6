//! The model archive: one trained segmenter, its affix inventory, its
//! statistics (ranker) and its lookup tables in a single self-describing
//! text file.
//!
//! # Format, version 1
//!
//! Line-oriented UTF-8. The first line is the magic `daseg-model v1`;
//! sections follow in a fixed order, each opened by a bracketed name.
//! Lists are introduced by a `name=count` line followed by exactly
//! `count` entry lines; multi-field entries separate fields with tabs
//! (keys may legitimately be empty strings, which tabs keep parseable).
//! Blank lines are ignored. There are no comments and no escaping —
//! no field may contain a tab or newline, which holds for Buckwalter
//! text by construction.
//!
//! ```text
//! daseg-model v1
//! system=ranker | tagger
//! dialect=<name>
//!
//! [inventory]
//! max_prefix_run=<n>      max_suffix_run=<n>      min_stem_len=<n>   (one per line)
//! prefixes=<n>            then n affix lines
//! suffixes=<n>            then n affix lines
//!
//! [ranker]                (ranker archives only)
//! c=<f64>  seed=<u64>  bias=<f64>                 (one per line)
//! features=11             then name<TAB>weight<TAB>mean<TAB>std per feature
//!
//! [stats]                 (ranker archives only)
//! smoothing_k / avg_stem_len / stem_tokens / stem_vocab /
//! stem_suffix_tokens / stem_suffix_vocab           (key=value lines)
//! six `table=<n>` lists of key<TAB>probability, two `table=<n>`
//! lists of outer<TAB>inner<TAB>probability
//!
//! [tagger]                (tagger archives only)
//! d / h / peepholes / per_word                     (key=value lines)
//! vocab=<n>               then codepoint<TAB>index per character
//! params=<n>              then one parameter value per line, in
//!                         `TaggerParams::param_vec` order
//!
//! [lookup]
//! normalize_keys=<bool>
//! da=<n>                  then key<TAB>stem_index<TAB>piece... per word
//! msa=<n>                 same entry shape
//! ```
//!
//! Every `f64` is written with Rust's shortest-round-trip `Display`
//! and read back with `str::parse`, which reproduces the exact bits for
//! all finite values — so save → load → save yields byte-identical
//! files, and a loaded model scores byte-identically to the saved one.
//! Loading validates the magic line, section order, every list count,
//! feature names, vocabulary contiguity, parameter-vector length
//! against the declared shapes, and finiteness of every number. The
//! ranker's training-loss history is a training artifact, not part of
//! the model, and is not archived.

use std::collections::BTreeMap;
use std::path::Path;

use crate::affixes::{AffixInventory, Segmentation};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, LexiconSet, StatTables, FEATURE_NAMES};
use crate::harness::SystemKind;
use crate::lookup::{LookupTable, Scheme};
use crate::neural::{init_params, tag_words, CharVocab, Hyperparams, TaggerParams};
use crate::ranker::{segment_with_ranker, LinearRanker};

const MAGIC: &str = "daseg-model v1";
const DIM: usize = FeatureVector::DIM;

/// The trained model inside an archive.
#[derive(Debug, Clone)]
pub enum Model {
    /// The linear ranker and the statistic tables its features need.
    Ranker { ranker: LinearRanker, stats: StatTables },
    Tagger(TaggerParams),
}

/// One trained segmenter with everything needed to run it.
#[derive(Debug, Clone)]
pub struct ModelArchive {
    pub inventory: AffixInventory,
    pub model: Model,
    pub lookup: LookupTable,
}

impl ModelArchive {
    pub fn system(&self) -> SystemKind {
        match self.model {
            Model::Ranker { .. } => SystemKind::Ranker,
            Model::Tagger(_) => SystemKind::Tagger,
        }
    }

    pub fn dialect(&self) -> &str {
        self.inventory.dialect()
    }

    /// Segments the word tokens of one tweet, resolving each through
    /// the archived lookup tables under `scheme` before falling back to
    /// the model. The tagger sees the whole sequence (unless it was
    /// trained per-word); the ranker scores words independently.
    /// `lex` supplies the ranker's lexicon features and should match
    /// training (the CLI uses the built-in set for both).
    pub fn segment_words(
        &self,
        words: &[String],
        scheme: Scheme,
        lex: &LexiconSet,
    ) -> Vec<Segmentation> {
        let model_out: Vec<Segmentation> = match &self.model {
            Model::Ranker { ranker, stats } => words
                .iter()
                .map(|w| segment_with_ranker(w, ranker, &self.inventory, stats, lex))
                .collect(),
            Model::Tagger(params) => tag_words(params, words, &self.inventory),
        };
        words
            .iter()
            .zip(model_out)
            .map(|(word, fallback)| self.lookup.resolve(word, scheme, |_| fallback))
            .collect()
    }

    /// Renders the archive; see the module docs for the exact format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        out.push_str(&format!("system={}\n", self.system()));
        out.push_str(&format!("dialect={}\n", self.dialect()));

        out.push_str("\n[inventory]\n");
        let inv = &self.inventory;
        out.push_str(&format!("max_prefix_run={}\n", inv.max_prefix_run()));
        out.push_str(&format!("max_suffix_run={}\n", inv.max_suffix_run()));
        out.push_str(&format!("min_stem_len={}\n", inv.min_stem_len()));
        out.push_str(&format!("prefixes={}\n", inv.prefixes().len()));
        for a in inv.prefixes() {
            out.push_str(a);
            out.push('\n');
        }
        out.push_str(&format!("suffixes={}\n", inv.suffixes().len()));
        for a in inv.suffixes() {
            out.push_str(a);
            out.push('\n');
        }

        match &self.model {
            Model::Ranker { ranker, stats } => {
                out.push_str("\n[ranker]\n");
                out.push_str(&format!("c={}\n", ranker.c_param));
                out.push_str(&format!("seed={}\n", ranker.seed));
                out.push_str(&format!("bias={}\n", ranker.bias));
                out.push_str(&format!("features={DIM}\n"));
                for i in 0..DIM {
                    out.push_str(&format!(
                        "{}\t{}\t{}\t{}\n",
                        FEATURE_NAMES[i], ranker.weights[i], ranker.means[i], ranker.stds[i]
                    ));
                }

                out.push_str("\n[stats]\n");
                out.push_str(&format!("smoothing_k={}\n", stats.smoothing_k));
                out.push_str(&format!("avg_stem_len={}\n", stats.avg_stem_len));
                out.push_str(&format!("stem_tokens={}\n", stats.stem_tokens));
                out.push_str(&format!("stem_vocab={}\n", stats.stem_vocab));
                out.push_str(&format!("stem_suffix_tokens={}\n", stats.stem_suffix_tokens));
                out.push_str(&format!("stem_suffix_vocab={}\n", stats.stem_suffix_vocab));
                for (name, map) in [
                    ("prefix_seq_prob", &stats.prefix_seq_prob),
                    ("suffix_seq_prob", &stats.suffix_seq_prob),
                    ("prefix_seq_marginal", &stats.prefix_seq_marginal),
                    ("suffix_seq_marginal", &stats.suffix_seq_marginal),
                    ("stem_unigram", &stats.stem_unigram),
                    ("stem_suffix_unigram", &stats.stem_suffix_unigram),
                ] {
                    out.push_str(&format!("{name}={}\n", map.len()));
                    for (k, v) in map {
                        out.push_str(&format!("{k}\t{v}\n"));
                    }
                }
                for (name, map) in [
                    ("prefix_given_suffix", &stats.prefix_given_suffix),
                    ("suffix_given_prefix", &stats.suffix_given_prefix),
                ] {
                    let pairs: usize = map.values().map(|m| m.len()).sum();
                    out.push_str(&format!("{name}={pairs}\n"));
                    for (outer, inner) in map {
                        for (k, v) in inner {
                            out.push_str(&format!("{outer}\t{k}\t{v}\n"));
                        }
                    }
                }
            }
            Model::Tagger(params) => {
                out.push_str("\n[tagger]\n");
                out.push_str(&format!("d={}\n", params.embedding_dim()));
                out.push_str(&format!("h={}\n", params.hidden_dim()));
                out.push_str(&format!("peepholes={}\n", params.peepholes()));
                out.push_str(&format!("per_word={}\n", params.per_word()));
                out.push_str(&format!("vocab={}\n", params.vocab().len()));
                for (c, i) in params.vocab().chars() {
                    out.push_str(&format!("{}\t{i}\n", c as u32));
                }
                let values = params.param_vec();
                out.push_str(&format!("params={}\n", values.len()));
                for v in values {
                    out.push_str(&format!("{v}\n"));
                }
            }
        }

        out.push_str("\n[lookup]\n");
        out.push_str(&format!("normalize_keys={}\n", self.lookup.normalize_keys));
        for (name, map) in [("da", &self.lookup.da_map), ("msa", &self.lookup.msa_map)] {
            out.push_str(&format!("{name}={}\n", map.len()));
            for (key, seg) in map {
                out.push_str(key);
                out.push_str(&format!("\t{}", seg.prefixes().len()));
                for piece in seg.pieces() {
                    out.push('\t');
                    out.push_str(piece);
                }
                out.push('\n');
            }
        }
        out
    }

    /// Parses archive text. `origin` names the source in errors.
    pub fn parse(text: &str, origin: &str) -> Result<ModelArchive> {
        let mut r = Reader::new(text, origin);
        let (line_no, magic) = r.next_line()?;
        if magic != MAGIC {
            return Err(Error::at(
                origin,
                line_no,
                format!("not a model archive (expected {MAGIC:?}, got {magic:?})"),
            ));
        }
        let system = match r.kv("system")? {
            "ranker" => SystemKind::Ranker,
            "tagger" => SystemKind::Tagger,
            other => {
                return Err(r.err(format!("unknown system {other:?}")));
            }
        };
        let dialect = r.kv("dialect")?.to_string();

        r.section("inventory")?;
        let max_prefix_run: usize = r.kv_parse("max_prefix_run")?;
        let max_suffix_run: usize = r.kv_parse("max_suffix_run")?;
        let min_stem_len: usize = r.kv_parse("min_stem_len")?;
        let n_prefixes: usize = r.kv_parse("prefixes")?;
        let prefixes: Vec<String> =
            (0..n_prefixes).map(|_| r.next_line().map(|(_, l)| l.to_string())).collect::<Result<_>>()?;
        let n_suffixes: usize = r.kv_parse("suffixes")?;
        let suffixes: Vec<String> =
            (0..n_suffixes).map(|_| r.next_line().map(|(_, l)| l.to_string())).collect::<Result<_>>()?;
        let inventory = AffixInventory::new(&dialect, prefixes, suffixes)
            .and_then(|inv| inv.with_limits(max_prefix_run, max_suffix_run, min_stem_len))
            .map_err(|e| Error::validation(format!("{origin}: bad inventory: {e}")))?;

        let model = match system {
            SystemKind::Ranker => {
                r.section("ranker")?;
                let c_param: f64 = r.kv_finite("c")?;
                if !(c_param > 0.0) {
                    return Err(r.err(format!("c must be positive, got {c_param}")));
                }
                let seed: u64 = r.kv_parse("seed")?;
                let bias: f64 = r.kv_finite("bias")?;
                let n_features: usize = r.kv_parse("features")?;
                if n_features != DIM {
                    return Err(r.err(format!("expected {DIM} features, archive has {n_features}")));
                }
                let mut weights = [0.0; DIM];
                let mut means = [0.0; DIM];
                let mut stds = [0.0; DIM];
                for i in 0..DIM {
                    let (_, line) = r.next_line()?;
                    let fields: Vec<&str> = line.split('\t').collect();
                    if fields.len() != 4 {
                        return Err(r.err(format!("feature line needs 4 fields, got {line:?}")));
                    }
                    if fields[0] != FEATURE_NAMES[i] {
                        return Err(r.err(format!(
                            "feature {i} is {:?}, expected {:?}",
                            fields[0], FEATURE_NAMES[i]
                        )));
                    }
                    weights[i] = r.finite(r.parse_field(fields[1])?, fields[0])?;
                    means[i] = r.finite(r.parse_field(fields[2])?, fields[0])?;
                    stds[i] = r.finite(r.parse_field(fields[3])?, fields[0])?;
                }
                let ranker = LinearRanker::from_parts(weights, bias, means, stds, c_param, seed)
                    .map_err(|e| Error::validation(format!("{origin}: {e}")))?;

                r.section("stats")?;
                let smoothing_k: f64 = r.kv_finite("smoothing_k")?;
                let avg_stem_len: f64 = r.kv_finite("avg_stem_len")?;
                if smoothing_k < 0.0 || avg_stem_len < 0.0 {
                    return Err(r.err("statistics constants must be non-negative".to_string()));
                }
                let stem_tokens: usize = r.kv_parse("stem_tokens")?;
                let stem_vocab: usize = r.kv_parse("stem_vocab")?;
                let stem_suffix_tokens: usize = r.kv_parse("stem_suffix_tokens")?;
                let stem_suffix_vocab: usize = r.kv_parse("stem_suffix_vocab")?;
                let prefix_seq_prob = r.prob_map("prefix_seq_prob")?;
                let suffix_seq_prob = r.prob_map("suffix_seq_prob")?;
                let prefix_seq_marginal = r.prob_map("prefix_seq_marginal")?;
                let suffix_seq_marginal = r.prob_map("suffix_seq_marginal")?;
                let stem_unigram = r.prob_map("stem_unigram")?;
                let stem_suffix_unigram = r.prob_map("stem_suffix_unigram")?;
                let prefix_given_suffix = r.nested_prob_map("prefix_given_suffix")?;
                let suffix_given_prefix = r.nested_prob_map("suffix_given_prefix")?;
                let stats = StatTables {
                    prefix_seq_prob,
                    suffix_seq_prob,
                    prefix_given_suffix,
                    suffix_given_prefix,
                    prefix_seq_marginal,
                    suffix_seq_marginal,
                    stem_unigram,
                    stem_suffix_unigram,
                    stem_tokens,
                    stem_vocab,
                    stem_suffix_tokens,
                    stem_suffix_vocab,
                    avg_stem_len,
                    smoothing_k,
                };
                Model::Ranker { ranker, stats }
            }
            SystemKind::Tagger => {
                r.section("tagger")?;
                let d: usize = r.kv_parse("d")?;
                let h: usize = r.kv_parse("h")?;
                let peepholes: bool = r.kv_parse("peepholes")?;
                let per_word: bool = r.kv_parse("per_word")?;
                let n_vocab: usize = r.kv_parse("vocab")?;
                let mut pairs = Vec::with_capacity(n_vocab);
                for _ in 0..n_vocab {
                    let (_, line) = r.next_line()?;
                    let Some((cp, idx)) = line.split_once('\t') else {
                        return Err(r.err(format!("vocabulary line needs 2 fields, got {line:?}")));
                    };
                    let cp: u32 = r.parse_field(cp)?;
                    let c = char::from_u32(cp)
                        .ok_or_else(|| r.err(format!("invalid codepoint {cp}")))?;
                    pairs.push((c, r.parse_field::<usize>(idx)?));
                }
                let vocab = CharVocab::from_pairs(&pairs)
                    .map_err(|e| Error::validation(format!("{origin}: {e}")))?;
                let n_params: usize = r.kv_parse("params")?;
                let mut values = Vec::with_capacity(n_params);
                for _ in 0..n_params {
                    let (_, line) = r.next_line()?;
                    values.push(r.finite(r.parse_field(line)?, "parameter")?);
                }
                let hp = Hyperparams {
                    d,
                    h,
                    peepholes,
                    per_word,
                    ..Hyperparams::default()
                };
                let mut params = init_params(vocab, &hp)
                    .map_err(|e| Error::validation(format!("{origin}: bad tagger shape: {e}")))?;
                params
                    .set_param_vec(&values)
                    .map_err(|e| Error::validation(format!("{origin}: {e}")))?;
                Model::Tagger(params)
            }
        };

        r.section("lookup")?;
        let normalize_keys: bool = r.kv_parse("normalize_keys")?;
        let da_map = r.seg_map("da")?;
        let msa_map = r.seg_map("msa")?;
        let lookup = LookupTable { da_map, msa_map, normalize_keys };

        if let Some((line_no, stray)) = r.peek() {
            return Err(Error::at(origin, line_no, format!("unexpected trailing line {stray:?}")));
        }
        Ok(ModelArchive { inventory, model, lookup })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<ModelArchive> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        ModelArchive::parse(&text, &path.display().to_string())
    }
}

/// Line cursor over archive text: skips blank lines, tracks the line
/// number for errors, and parses the recurring shapes.
struct Reader<'a> {
    lines: Vec<&'a str>,
    pos: usize,
    origin: &'a str,
    last_line: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str, origin: &'a str) -> Reader<'a> {
        Reader { lines: text.lines().collect(), pos: 0, origin, last_line: 0 }
    }

    fn peek(&mut self) -> Option<(usize, &'a str)> {
        while let Some(line) = self.lines.get(self.pos) {
            if line.is_empty() {
                self.pos += 1;
                continue;
            }
            return Some((self.pos + 1, line));
        }
        None
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        match self.peek() {
            Some((no, line)) => {
                self.pos += 1;
                self.last_line = no;
                Ok((no, line))
            }
            None => Err(Error::at(self.origin, self.lines.len() + 1, "archive ends early")),
        }
    }

    fn err(&self, msg: String) -> Error {
        Error::at(self.origin, self.last_line, msg)
    }

    fn section(&mut self, name: &str) -> Result<()> {
        let (_, line) = self.next_line()?;
        if line != format!("[{name}]") {
            return Err(self.err(format!("expected section [{name}], got {line:?}")));
        }
        Ok(())
    }

    fn kv(&mut self, key: &str) -> Result<&'a str> {
        let (_, line) = self.next_line()?;
        match line.split_once('=') {
            Some((k, v)) if k == key => Ok(v),
            _ => Err(self.err(format!("expected {key}=..., got {line:?}"))),
        }
    }

    fn kv_parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let value = self.kv(key)?;
        value.parse().map_err(|_| self.err(format!("bad {key} value {value:?}")))
    }

    fn parse_field<T: std::str::FromStr>(&self, field: &str) -> Result<T> {
        field.parse().map_err(|_| self.err(format!("bad value {field:?}")))
    }

    fn finite(&self, v: f64, what: &str) -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(format!("{what} must be finite, got {v}")))
        }
    }

    fn kv_finite(&mut self, key: &str) -> Result<f64> {
        let v: f64 = self.kv_parse(key)?;
        self.finite(v, key)
    }

    /// A `name=count` list of `key<TAB>f64` lines.
    fn prob_map(&mut self, name: &str) -> Result<BTreeMap<String, f64>> {
        let count: usize = self.kv_parse(name)?;
        let mut map = BTreeMap::new();
        for _ in 0..count {
            let (_, line) = self.next_line()?;
            let Some((key, value)) = line.split_once('\t') else {
                return Err(self.err(format!("expected key<TAB>value, got {line:?}")));
            };
            let value = self.finite(self.parse_field(value)?, name)?;
            if map.insert(key.to_string(), value).is_some() {
                return Err(self.err(format!("duplicate {name} key {key:?}")));
            }
        }
        Ok(map)
    }

    /// A `name=count` list of `outer<TAB>inner<TAB>f64` lines.
    fn nested_prob_map(&mut self, name: &str) -> Result<BTreeMap<String, BTreeMap<String, f64>>> {
        let count: usize = self.kv_parse(name)?;
        let mut map: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for _ in 0..count {
            let (_, line) = self.next_line()?;
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(self.err(format!("expected outer<TAB>inner<TAB>value, got {line:?}")));
            }
            let value = self.finite(self.parse_field(fields[2])?, name)?;
            if map
                .entry(fields[0].to_string())
                .or_default()
                .insert(fields[1].to_string(), value)
                .is_some()
            {
                return Err(self.err(format!("duplicate {name} pair {:?}", (fields[0], fields[1]))));
            }
        }
        Ok(map)
    }

    /// A `name=count` list of `key<TAB>stem_index<TAB>piece...` lines.
    fn seg_map(&mut self, name: &str) -> Result<BTreeMap<String, Segmentation>> {
        let count: usize = self.kv_parse(name)?;
        let mut map = BTreeMap::new();
        for _ in 0..count {
            let (_, line) = self.next_line()?;
            let mut fields = line.split('\t');
            let key = fields.next().unwrap_or_default().to_string();
            let stem_index: usize = self
                .parse_field(fields.next().ok_or_else(|| self.err("segmentation line needs a stem index".to_string()))?)?;
            let pieces: Vec<String> = fields.map(str::to_string).collect();
            let seg = Segmentation::from_pieces(pieces, stem_index)
                .map_err(|e| self.err(format!("bad segmentation for {key:?}: {e}")))?;
            if map.insert(key.clone(), seg).is_some() {
                return Err(self.err(format!("duplicate {name} key {key:?}")));
            }
        }
        Ok(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::build_stats;
    use crate::harness::synth::{generate_synthetic_corpus, Grammar};
    use crate::neural::train_tagger;
    use crate::ranker::{ranking_instances, train_ranker};

    fn trained_ranker_archive() -> ModelArchive {
        let grammar = Grammar::builtin();
        let corpus = generate_synthetic_corpus(grammar, 120, 41).unwrap();
        let pairs = corpus.gold_words();
        let inv = grammar.inventory();
        let lex = LexiconSet::builtin();
        let stats = build_stats(&pairs, 0.01).unwrap();
        let (instances, _) = ranking_instances(&pairs, &inv, &stats, &lex).unwrap();
        let ranker = train_ranker(&instances, 10.0, 8, 3).unwrap();
        let (lookup, _) = LookupTable::build(&pairs, Some(&pairs[..20]), false).unwrap();
        ModelArchive { inventory: inv, model: Model::Ranker { ranker, stats }, lookup }
    }

    fn trained_tagger_archive() -> ModelArchive {
        let grammar = Grammar::builtin();
        let corpus = generate_synthetic_corpus(grammar, 60, 42).unwrap();
        let inv = grammar.inventory();
        let hp = Hyperparams {
            d: 5,
            h: 6,
            max_epochs: 2,
            patience: 1,
            batch_size: 4,
            ..Hyperparams::default()
        };
        let tweets = corpus.tweet_word_pairs();
        let (params, _) = train_tagger(&tweets[1..], &tweets[..1], &inv, &hp).unwrap();
        let (lookup, _) = LookupTable::build(&corpus.gold_words(), None, true).unwrap();
        ModelArchive { inventory: inv, model: Model::Tagger(params), lookup }
    }

    #[test]
    fn ranker_archive_round_trips_byte_identically() {
        let archive = trained_ranker_archive();
        let text = archive.to_text();
        let reloaded = ModelArchive::parse(&text, "test").unwrap();
        assert_eq!(text, reloaded.to_text());
        assert_eq!(reloaded.system(), SystemKind::Ranker);
        assert_eq!(reloaded.dialect(), "egyptian");

        // Behavioral identity on fresh words, under every scheme.
        let lex = LexiconSet::builtin();
        let probe = generate_synthetic_corpus(Grammar::builtin(), 40, 99).unwrap();
        let words: Vec<String> = probe.gold_words().into_iter().map(|(w, _)| w).collect();
        for scheme in Scheme::ALL {
            let a = archive.segment_words(&words, scheme, &lex);
            let b = reloaded.segment_words(&words, scheme, &lex);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn tagger_archive_round_trips_byte_identically() {
        let archive = trained_tagger_archive();
        let text = archive.to_text();
        let reloaded = ModelArchive::parse(&text, "test").unwrap();
        assert_eq!(text, reloaded.to_text());
        assert_eq!(reloaded.system(), SystemKind::Tagger);

        let lex = LexiconSet::empty();
        let probe = generate_synthetic_corpus(Grammar::builtin(), 30, 98).unwrap();
        let words: Vec<String> = probe.gold_words().into_iter().map(|(w, _)| w).collect();
        for scheme in [Scheme::None, Scheme::Da] {
            assert_eq!(
                archive.segment_words(&words, scheme, &lex),
                reloaded.segment_words(&words, scheme, &lex)
            );
        }
    }

    #[test]
    fn archives_survive_the_disk() {
        let archive = trained_tagger_archive();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.dsm");
        archive.save(&path).unwrap();
        let reloaded = ModelArchive::load(&path).unwrap();
        assert_eq!(archive.to_text(), reloaded.to_text());
    }

    #[test]
    fn segment_words_applies_lookup_precedence() {
        let archive = trained_ranker_archive();
        let lex = LexiconSet::builtin();
        // A word the DA table knows: resolve must return its table gold
        // regardless of what the model would say.
        let (word, gold) = {
            let (k, v) = archive.lookup.da_map.iter().next().unwrap();
            (k.clone(), v.clone())
        };
        let out = archive.segment_words(&[word.clone()], Scheme::Da, &lex);
        assert_eq!(out[0], gold);
    }

    #[test]
    fn malformed_archives_fail_with_line_numbers() {
        let good = trained_ranker_archive().to_text();
        let cases: Vec<(String, &str)> = vec![
            ("nonsense\n".to_string(), "not a model archive"),
            (good.replace("system=ranker", "system=oracle"), "unknown system"),
            (good.replace("[stats]", "[statistics]"), "expected section [stats]"),
            (good.replace("features=11", "features=3"), "expected 11 features"),
            (good.replacen("prefix_cond", "mystery_feature", 1), "expected \"prefix_cond\""),
            (good.replace("normalize_keys=false", "normalize_keys=perhaps"), "bad normalize_keys"),
            (format!("{good}zzz\n"), "unexpected trailing line"),
            (good.replace("c=10", "c=-10"), "c must be positive"),
        ];
        for (text, needle) in cases {
            let err = ModelArchive::parse(&text, "test").unwrap_err().to_string();
            assert!(err.contains(needle), "{err:?} missing {needle:?}");
        }
        // Truncation is caught by the count checks.
        let cut = good.lines().take(20).collect::<Vec<_>>().join("\n");
        assert!(ModelArchive::parse(&cut, "test").is_err());
    }

    #[test]
    fn tagger_shape_validation_rejects_mismatches() {
        let good = trained_tagger_archive().to_text();
        let grown = good.replace("d=5", "d=6");
        let err = ModelArchive::parse(&grown, "test").unwrap_err().to_string();
        assert!(err.contains("expected"), "{err:?}");
        let bad_vocab = {
            // Break index contiguity by bumping the first index.
            let mut lines: Vec<String> = good.lines().map(str::to_string).collect();
            let at = lines.iter().position(|l| l.starts_with("vocab=")).unwrap() + 1;
            let (cp, _) = lines[at].split_once('\t').unwrap();
            lines[at] = format!("{cp}\t7");
            lines.join("\n")
        };
        let err = ModelArchive::parse(&bad_vocab, "test").unwrap_err().to_string();
        assert!(err.contains("expected"), "{err:?}");
        let broken = {
            let mut lines: Vec<String> = good.lines().map(str::to_string).collect();
            let at = lines.iter().position(|l| l.starts_with("params=")).unwrap() + 1;
            lines[at] = "NaN".to_string();
            lines.join("\n")
        };
        let err = ModelArchive::parse(&broken, "test").unwrap_err().to_string();
        assert!(err.contains("finite"), "{err:?}");
    }
}
