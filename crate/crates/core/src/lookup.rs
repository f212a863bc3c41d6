//! Word-level segmentation memory: the None / DA / DA+MSA lookup
//! schemes.
//!
//! Training words whose segmentation was observed directly can bypass
//! the model at test time. A [`LookupTable`] holds one map built from
//! the dialectal training data and an optional second map built from an
//! MSA corpus; [`LookupTable::resolve`] consults them under the fixed
//! precedence of the chosen [`Scheme`] and falls back to a model
//! segmenter otherwise.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::affixes::Segmentation;
use crate::error::{Error, Result};
use crate::textnorm::normalize_matching;

/// Which memories to consult before the fallback segmenter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scheme {
    /// Model output only.
    None,
    /// Dialectal training memory, then the model.
    Da,
    /// Dialectal memory, then the MSA memory, then the model.
    DaMsa,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::None, Scheme::Da, Scheme::DaMsa];
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::None => "none",
            Scheme::Da => "da",
            Scheme::DaMsa => "da+msa",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scheme> {
        match s {
            "none" => Ok(Scheme::None),
            "da" => Ok(Scheme::Da),
            "da+msa" | "da_msa" | "da-msa" => Ok(Scheme::DaMsa),
            _ => Err(Error::validation(format!(
                "unknown scheme {s:?}; expected none, da, or da+msa"
            ))),
        }
    }
}

/// A word that was annotated with more than one segmentation in the
/// data a table was built from, with the per-variant frequencies. The
/// winning variant is listed first.
#[derive(Debug, Clone)]
pub struct Conflict {
    pub word: String,
    pub variants: Vec<(String, usize)>,
}

/// Exact-match segmentation memories for one dialect.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LookupTable {
    pub(crate) da_map: BTreeMap<String, Segmentation>,
    pub(crate) msa_map: BTreeMap<String, Segmentation>,
    pub(crate) normalize_keys: bool,
}

fn table_key(word: &str, normalize: bool) -> String {
    if normalize {
        normalize_matching(word)
    } else {
        word.to_string()
    }
}

/// Majority vote over the observed segmentations of each word. Ties go
/// to the variant with the fewest segments, then to the
/// lexicographically smallest split-point vector. Also the
/// context-independence rule used when training data disagrees with
/// itself about a word.
pub(crate) fn vote(entries: &[(String, Segmentation)], normalize: bool) -> Result<(BTreeMap<String, Segmentation>, Vec<Conflict>)> {
    let mut counts: BTreeMap<String, BTreeMap<Segmentation, usize>> = BTreeMap::new();
    for (i, (word, seg)) in entries.iter().enumerate() {
        if seg.surface() != *word {
            return Err(Error::validation(format!(
                "entry {i}: segmentation {seg} does not concatenate to {word:?}"
            )));
        }
        *counts.entry(table_key(word, normalize)).or_default().entry(seg.clone()).or_insert(0) += 1;
    }
    let mut map = BTreeMap::new();
    let mut conflicts = Vec::new();
    for (word, variants) in counts {
        let mut ranked: Vec<(Segmentation, usize)> = variants.into_iter().collect();
        ranked.sort_by(|(sa, ca), (sb, cb)| {
            cb.cmp(ca) // most frequent first
                .then(sa.num_segments().cmp(&sb.num_segments()))
                .then(sa.split_points().cmp(&sb.split_points()))
        });
        if ranked.len() > 1 {
            conflicts.push(Conflict {
                word: word.clone(),
                variants: ranked.iter().map(|(s, c)| (s.to_plus_string(), *c)).collect(),
            });
        }
        map.insert(word, ranked.into_iter().next().expect("at least one variant").0);
    }
    Ok((map, conflicts))
}

impl LookupTable {
    /// Builds the table from gold `(word, segmentation)` pairs. The
    /// conflict report lists words whose annotations disagreed, so
    /// annotation inconsistencies surface. `normalize_keys` applies
    /// Matching normalization to the lookup keys (off by default
    /// elsewhere: the segmenters work on raw words).
    pub fn build(
        da: &[(String, Segmentation)],
        msa: Option<&[(String, Segmentation)]>,
        normalize_keys: bool,
    ) -> Result<(LookupTable, Vec<Conflict>)> {
        if da.is_empty() {
            return Err(Error::validation("cannot build a lookup table from an empty corpus"));
        }
        let (da_map, mut conflicts) = vote(da, normalize_keys)?;
        let msa_map = match msa {
            Some(entries) => {
                let (map, msa_conflicts) = vote(entries, normalize_keys)?;
                conflicts.extend(msa_conflicts);
                map
            }
            None => BTreeMap::new(),
        };
        Ok((LookupTable { da_map, msa_map, normalize_keys }, conflicts))
    }

    pub fn da_len(&self) -> usize {
        self.da_map.len()
    }

    pub fn msa_len(&self) -> usize {
        self.msa_map.len()
    }

    /// Looks `word` up under the scheme's precedence; the fallback
    /// segmenter is only invoked on a miss.
    ///
    /// With normalized keys a hit may have been stored for a different
    /// surface spelling of the same normalized form. The stored split is
    /// then transplanted onto the query word when the lengths agree
    /// (Matching normalization can delete characters, in which case the
    /// hit is discarded and the fallback used — the in-situ invariant
    /// outranks recall).
    pub fn resolve(
        &self,
        word: &str,
        scheme: Scheme,
        fallback: impl FnOnce(&str) -> Segmentation,
    ) -> Segmentation {
        let hit = match scheme {
            Scheme::None => None,
            Scheme::Da => self.get(&self.da_map, word),
            Scheme::DaMsa => self.get(&self.da_map, word).or_else(|| self.get(&self.msa_map, word)),
        };
        hit.unwrap_or_else(|| fallback(word))
    }

    /// [`LookupTable::resolve`] through a per-configuration cache keyed
    /// by surface form. Values are deterministic, so reusing a cache
    /// across calls (or populating it from several threads,
    /// last-write-wins) is safe as long as table and scheme stay fixed.
    pub fn resolve_cached(
        &self,
        word: &str,
        scheme: Scheme,
        cache: &mut BTreeMap<String, Segmentation>,
        fallback: impl FnOnce(&str) -> Segmentation,
    ) -> Segmentation {
        if let Some(seg) = cache.get(word) {
            return seg.clone();
        }
        let seg = self.resolve(word, scheme, fallback);
        cache.insert(word.to_string(), seg.clone());
        seg
    }

    fn get(&self, map: &BTreeMap<String, Segmentation>, word: &str) -> Option<Segmentation> {
        let key = table_key(word, self.normalize_keys);
        let stored = map.get(&key)?;
        if stored.surface() == word {
            return Some(stored.clone());
        }
        // Normalized-key hit for a different spelling: re-cut the query
        // word at the stored split points if the lengths allow it.
        let chars: Vec<char> = word.chars().collect();
        if chars.len() != stored.surface().chars().count() {
            return None;
        }
        let mut pieces = Vec::with_capacity(stored.num_segments());
        let mut prev = 0;
        for b in stored.split_points().into_iter().chain(std::iter::once(chars.len())) {
            pieces.push(chars[prev..b].iter().collect::<String>());
            prev = b;
        }
        let stem_index = stored.prefixes().len();
        Some(Segmentation::from_pieces(pieces, stem_index).expect("same shape as stored split"))
    }

    /// The dialectal map as `word<TAB>seg+ment+ed` lines, for
    /// inspection.
    pub fn da_tsv(&self) -> String {
        Self::tsv(&self.da_map)
    }

    /// The MSA map in the same two-column format.
    pub fn msa_tsv(&self) -> String {
        Self::tsv(&self.msa_map)
    }

    fn tsv(map: &BTreeMap<String, Segmentation>) -> String {
        let mut out = String::new();
        for (word, seg) in map {
            out.push_str(word);
            out.push('\t');
            out.push_str(&seg.to_plus_string());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seg(pieces: &[&str]) -> Segmentation {
        // Stem = first piece for these tests; roles are irrelevant to
        // lookup equality.
        Segmentation::from_pieces(pieces.iter().map(|s| s.to_string()).collect(), 0).unwrap()
    }

    fn pair(pieces: &[&str]) -> (String, Segmentation) {
        let s = seg(pieces);
        (s.surface(), s)
    }

    #[test]
    fn majority_vote_picks_most_frequent() {
        let da = vec![
            pair(&["w", "mn"]),
            pair(&["w", "mn"]),
            pair(&["w", "mn"]),
            pair(&["wmn"]),
        ];
        let (table, conflicts) = LookupTable::build(&da, None, false).unwrap();
        assert_eq!(table.da_map["wmn"].to_plus_string(), "w+mn");
        assert_eq!(conflicts.len(), 1);
        assert_eq!(conflicts[0].word, "wmn");
        assert_eq!(conflicts[0].variants, vec![("w+mn".to_string(), 3), ("wmn".to_string(), 1)]);
    }

    #[test]
    fn tie_goes_to_fewest_segments() {
        let da = vec![pair(&["mn"]), pair(&["m", "n"])];
        let (table, conflicts) = LookupTable::build(&da, None, false).unwrap();
        assert_eq!(table.da_map["mn"].to_plus_string(), "mn");
        assert_eq!(conflicts.len(), 1);
    }

    #[test]
    fn tie_on_segments_goes_to_earliest_split() {
        let da = vec![pair(&["a", "bc"]), pair(&["ab", "c"])];
        let (table, _) = LookupTable::build(&da, None, false).unwrap();
        // split [1] < split [2]
        assert_eq!(table.da_map["abc"].to_plus_string(), "a+bc");
    }

    #[test]
    fn msa_corpus_loads_into_msa_map_only() {
        let da = vec![pair(&["mn"])];
        let msa = vec![pair(&["w", "qAl"])];
        let (table, _) = LookupTable::build(&da, Some(&msa), false).unwrap();
        assert_eq!(table.da_len(), 1);
        assert_eq!(table.msa_len(), 1);
        assert!(table.da_map.contains_key("mn"));
        assert!(!table.da_map.contains_key("wqAl"));
        assert!(table.msa_map.contains_key("wqAl"));
    }

    #[test]
    fn build_validates_concatenation() {
        let bad = vec![("xyz".to_string(), seg(&["a", "b"]))];
        assert!(LookupTable::build(&bad, None, false).is_err());
        assert!(LookupTable::build(&[], None, false).is_err());
    }

    #[test]
    fn precedence_examples() {
        let da = vec![pair(&["w", "mn"])];
        let msa = vec![pair(&["wmn"]), pair(&["w", "qAl"])];
        let (table, _) = LookupTable::build(&da, Some(&msa), false).unwrap();
        let fallback = |w: &str| Segmentation::unsegmented(&format!("fb:{w}"));

        // DA hit wins under DA+MSA even when the MSA map disagrees.
        assert_eq!(table.resolve("wmn", Scheme::DaMsa, fallback).to_plus_string(), "w+mn");
        // DA ignores the MSA map entirely.
        assert_eq!(table.resolve("wqAl", Scheme::Da, fallback).to_plus_string(), "fb:wqAl");
        // Misses under every scheme reach the fallback.
        assert_eq!(table.resolve("qlbh", Scheme::DaMsa, fallback).to_plus_string(), "fb:qlbh");
        // None never looks anything up.
        assert_eq!(table.resolve("wmn", Scheme::None, fallback).to_plus_string(), "fb:wmn");
    }

    #[test]
    fn normalized_keys_transplant_split_points() {
        let da = vec![(">nA".to_string(), Segmentation::from_pieces(vec![">nA".into()], 0).unwrap()),
                      pair(&["w", "mn"])];
        let (table, _) = LookupTable::build(&da, None, true).unwrap();
        // Same normalized form, different spelling, same length:
        // the stored split carries over to the query's characters.
        let hit = table.resolve("AnA", Scheme::Da, |_| unreachable!());
        assert_eq!(hit.to_plus_string(), "AnA");
        let hit = table.resolve("wmn", Scheme::Da, |_| unreachable!());
        assert_eq!(hit.to_plus_string(), "w+mn");
        // Length changed by normalization: fall back.
        let miss = table.resolve(">nAo", Scheme::Da, |w| Segmentation::unsegmented(w));
        assert_eq!(miss.to_plus_string(), ">nAo");
    }

    #[test]
    fn cache_returns_stored_values() {
        let da = vec![pair(&["w", "mn"])];
        let (table, _) = LookupTable::build(&da, None, false).unwrap();
        let mut cache = BTreeMap::new();
        let mut calls = 0;
        for _ in 0..3 {
            let s = table.resolve_cached("qlbh", Scheme::Da, &mut cache, |w| {
                calls += 1;
                Segmentation::unsegmented(w)
            });
            assert_eq!(s.to_plus_string(), "qlbh");
        }
        assert_eq!(calls, 1);
    }

    #[test]
    fn tsv_export() {
        let da = vec![pair(&["w", "mn"]), pair(&["qlb", "h"])];
        let (table, _) = LookupTable::build(&da, None, false).unwrap();
        assert_eq!(table.da_tsv(), "qlbh\tqlb+h\nwmn\tw+mn\n");
        assert_eq!(table.msa_tsv(), "");
    }

    /// Random word / table draws for the precedence properties.
    fn words() -> impl Strategy<Value = Vec<(String, Segmentation)>> {
        let piece = "[abw]{1,2}";
        prop::collection::vec((piece.prop_map(String::from), "[mnh]{1,3}".prop_map(String::from)), 1..12)
            .prop_map(|pairs| {
                pairs
                    .into_iter()
                    .map(|(a, b)| {
                        let seg = Segmentation::from_pieces(vec![a, b], 1).unwrap();
                        (seg.surface(), seg)
                    })
                    .collect()
            })
    }

    proptest! {
        #[test]
        fn scheme_none_is_the_fallback(da in words(), probe in "[abwmnh]{1,5}") {
            let (table, _) = LookupTable::build(&da, None, false).unwrap();
            let got = table.resolve(&probe, Scheme::None, Segmentation::unsegmented);
            prop_assert_eq!(got, Segmentation::unsegmented(&probe));
        }

        #[test]
        fn da_msa_equals_da_outside_msa_map(
            da in words(),
            msa in words(),
            probe in "[abwmnh]{1,5}",
        ) {
            let (table, _) = LookupTable::build(&da, Some(&msa), false).unwrap();
            if !table.msa_map.contains_key(&probe) {
                let a = table.resolve(&probe, Scheme::DaMsa, Segmentation::unsegmented);
                let b = table.resolve(&probe, Scheme::Da, Segmentation::unsegmented);
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn precedence_is_da_then_msa_then_fallback(
            da in words(),
            msa in words(),
            probe in "[abwmnh]{1,5}",
        ) {
            let (table, _) = LookupTable::build(&da, Some(&msa), false).unwrap();
            let got = table.resolve(&probe, Scheme::DaMsa, Segmentation::unsegmented);
            let expect = table
                .da_map
                .get(&probe)
                .or_else(|| table.msa_map.get(&probe))
                .cloned()
                .unwrap_or_else(|| Segmentation::unsegmented(&probe));
            prop_assert_eq!(got, expect);
        }
    }
}
