//! Affix inventories, exhaustive candidate segmentations, and the
//! BMES-WB character label coding.
//!
//! A [`Segmentation`] is an in-situ split of a surface word into
//! `prefixes + stem + suffixes`: the concatenation of its pieces is the
//! word, character for character, with nothing added or restored.
//! [`generate_candidates`] enumerates every split whose affixes come from
//! a per-dialect [`AffixInventory`], and [`encode_labels`] /
//! [`decode_labels`] convert between splits and per-character labels for
//! the sequence tagger.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Character labels for segmentation as sequence tagging: Begin, Middle,
/// and End of a multi-character segment, Single-character segment, and
/// Word Boundary (the space between tokens when a whole tweet is tagged
/// as one sequence).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    B,
    M,
    E,
    S,
    WB,
}

impl Label {
    pub const COUNT: usize = 5;
    pub const ALL: [Label; Label::COUNT] = [Label::B, Label::M, Label::E, Label::S, Label::WB];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }

    /// Whether `next` may immediately follow `self` in a valid sequence.
    pub fn may_precede(self, next: Label) -> bool {
        use Label::*;
        matches!(
            (self, next),
            (B, M)
                | (B, E)
                | (M, M)
                | (M, E)
                | (E, B)
                | (E, S)
                | (E, WB)
                | (S, B)
                | (S, S)
                | (S, WB)
                | (WB, B)
                | (WB, S)
        )
    }

    /// Whether a valid sequence may begin with `self`.
    pub fn may_start(self) -> bool {
        matches!(self, Label::B | Label::S)
    }

    /// Whether a valid sequence may end with `self`.
    pub fn may_end(self) -> bool {
        matches!(self, Label::E | Label::S)
    }

    /// Full validity check: non-empty, legal start and end, and every
    /// adjacent pair a legal transition.
    pub fn sequence_is_valid(labels: &[Label]) -> bool {
        let (first, last) = match (labels.first(), labels.last()) {
            (Some(&f), Some(&l)) => (f, l),
            _ => return false,
        };
        first.may_start()
            && last.may_end()
            && labels.windows(2).all(|w| w[0].may_precede(w[1]))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Label::B => "B",
            Label::M => "M",
            Label::E => "E",
            Label::S => "S",
            Label::WB => "WB",
        };
        f.write_str(s)
    }
}

/// One in-situ segmentation of one surface word: an ordered list of
/// non-empty pieces plus the index of the piece that is the stem. Pieces
/// before the stem are prefixes, pieces after it suffixes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segmentation {
    pieces: Vec<String>,
    stem_index: usize,
}

impl Segmentation {
    /// Builds a segmentation from explicit role lists.
    pub fn new(
        prefixes: Vec<String>,
        stem: String,
        suffixes: Vec<String>,
    ) -> Result<Segmentation> {
        let stem_index = prefixes.len();
        let pieces: Vec<String> =
            prefixes.into_iter().chain(std::iter::once(stem)).chain(suffixes).collect();
        Segmentation::from_pieces(pieces, stem_index)
    }

    /// Builds a segmentation from a piece list and a stem position.
    pub fn from_pieces(pieces: Vec<String>, stem_index: usize) -> Result<Segmentation> {
        if pieces.is_empty() {
            return Err(Error::validation("segmentation must have at least one piece"));
        }
        if stem_index >= pieces.len() {
            return Err(Error::validation(format!(
                "stem index {stem_index} out of range for {} pieces",
                pieces.len()
            )));
        }
        if let Some(empty_at) = pieces.iter().position(|p| p.is_empty()) {
            return Err(Error::validation(format!(
                "segmentation piece {empty_at} is empty"
            )));
        }
        Ok(Segmentation { pieces, stem_index })
    }

    /// The whole word as a single stem.
    pub fn unsegmented(word: &str) -> Segmentation {
        Segmentation { pieces: vec![word.to_string()], stem_index: 0 }
    }

    pub fn pieces(&self) -> &[String] {
        &self.pieces
    }

    pub fn prefixes(&self) -> &[String] {
        &self.pieces[..self.stem_index]
    }

    pub fn stem(&self) -> &str {
        &self.pieces[self.stem_index]
    }

    pub fn suffixes(&self) -> &[String] {
        &self.pieces[self.stem_index + 1..]
    }

    pub fn num_segments(&self) -> usize {
        self.pieces.len()
    }

    /// The surface word: concatenation of all pieces.
    pub fn surface(&self) -> String {
        self.pieces.concat()
    }

    /// Interior boundary offsets in characters, strictly increasing,
    /// excluding 0 and the word length. The unsegmented word has `[]`.
    pub fn split_points(&self) -> Vec<usize> {
        let mut points = Vec::with_capacity(self.pieces.len().saturating_sub(1));
        let mut offset = 0;
        for piece in &self.pieces[..self.pieces.len() - 1] {
            offset += piece.chars().count();
            points.push(offset);
        }
        points
    }

    /// True when both segmentations cut the word in the same places
    /// (role assignment ignored). This is the notion of equality used by
    /// evaluation and the lookup tables.
    pub fn same_split(&self, other: &Segmentation) -> bool {
        self.pieces == other.pieces
    }

    /// Renders the pieces joined by `+`, escaping literal `+` as `\+`
    /// and `\` as `\\` so the corpus format stays unambiguous.
    pub fn to_plus_string(&self) -> String {
        let mut out = String::new();
        for (i, piece) in self.pieces.iter().enumerate() {
            if i > 0 {
                out.push('+');
            }
            for c in piece.chars() {
                if c == '+' || c == '\\' {
                    out.push('\\');
                }
                out.push(c);
            }
        }
        out
    }

    /// Parses `seg+ment+ed` notation back into pieces, honoring the
    /// `\+` / `\\` escapes. Roles are not encoded in this notation; use
    /// [`assign_roles`] to recover them.
    pub fn parse_plus(text: &str) -> Result<Vec<String>> {
        let mut pieces = Vec::new();
        let mut cur = String::new();
        let mut chars = text.chars();
        while let Some(c) = chars.next() {
            match c {
                '\\' => match chars.next() {
                    Some(esc @ ('+' | '\\')) => cur.push(esc),
                    Some(other) => {
                        return Err(Error::validation(format!(
                            "unknown escape '\\{other}' in {text:?}"
                        )))
                    }
                    None => {
                        return Err(Error::validation(format!(
                            "dangling escape at end of {text:?}"
                        )))
                    }
                },
                '+' => {
                    pieces.push(std::mem::take(&mut cur));
                    // an empty piece (leading, trailing, or doubled '+')
                    // is caught below
                }
                _ => cur.push(c),
            }
        }
        pieces.push(cur);
        if pieces.iter().any(|p| p.is_empty()) {
            return Err(Error::validation(format!("empty segment in {text:?}")));
        }
        Ok(pieces)
    }
}

impl fmt::Display for Segmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_plus_string())
    }
}

/// The closed affix sets for one dialect, plus the generation limits.
#[derive(Debug, Clone)]
pub struct AffixInventory {
    dialect: String,
    prefixes: Vec<String>,
    suffixes: Vec<String>,
    prefix_set: BTreeSet<String>,
    suffix_set: BTreeSet<String>,
    max_prefix_run: usize,
    max_suffix_run: usize,
    min_stem_len: usize,
}

const DEFAULT_MAX_PREFIX_RUN: usize = 4;
const DEFAULT_MAX_SUFFIX_RUN: usize = 3;
const DEFAULT_MIN_STEM_LEN: usize = 1;

impl AffixInventory {
    /// Builds an inventory with the default run limits (4 prefixes,
    /// 3 suffixes, stem of at least 1 letter).
    pub fn new(
        dialect: &str,
        prefixes: Vec<String>,
        suffixes: Vec<String>,
    ) -> Result<AffixInventory> {
        let mut inv = AffixInventory {
            dialect: dialect.to_string(),
            prefixes: Vec::new(),
            suffixes: Vec::new(),
            prefix_set: BTreeSet::new(),
            suffix_set: BTreeSet::new(),
            max_prefix_run: DEFAULT_MAX_PREFIX_RUN,
            max_suffix_run: DEFAULT_MAX_SUFFIX_RUN,
            min_stem_len: DEFAULT_MIN_STEM_LEN,
        };
        for p in prefixes {
            inv.push_affix(p, true, None)?;
        }
        for s in suffixes {
            inv.push_affix(s, false, None)?;
        }
        Ok(inv)
    }

    /// Replaces the run limits, validating that each is at least 1.
    pub fn with_limits(
        mut self,
        max_prefix_run: usize,
        max_suffix_run: usize,
        min_stem_len: usize,
    ) -> Result<AffixInventory> {
        if max_prefix_run == 0 || max_suffix_run == 0 || min_stem_len == 0 {
            return Err(Error::validation(
                "run limits and minimum stem length must be at least 1",
            ));
        }
        self.max_prefix_run = max_prefix_run;
        self.max_suffix_run = max_suffix_run;
        self.min_stem_len = min_stem_len;
        Ok(self)
    }

    fn push_affix(&mut self, affix: String, prefix: bool, at: Option<(&str, usize)>) -> Result<()> {
        let err = |msg: String| match at {
            Some((origin, line)) => Error::at(origin, line, msg),
            None => Error::validation(msg),
        };
        if affix.is_empty() {
            return Err(err("empty affix".to_string()));
        }
        let (list, set, kind) = if prefix {
            (&mut self.prefixes, &mut self.prefix_set, "prefix")
        } else {
            (&mut self.suffixes, &mut self.suffix_set, "suffix")
        };
        if !set.insert(affix.clone()) {
            return Err(err(format!("duplicate {kind} {affix:?}")));
        }
        list.push(affix);
        Ok(())
    }

    /// Parses the inventory file format: optional `key=value` header
    /// lines (`dialect`, `max_prefix_run`, `max_suffix_run`,
    /// `min_stem_len`), then `[prefixes]` / `[suffixes]` sections with
    /// one affix per line. `#` starts a comment; blank lines are
    /// ignored. `origin` is used in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<AffixInventory> {
        #[derive(PartialEq)]
        enum Section {
            Header,
            Prefixes,
            Suffixes,
        }
        let mut inv = AffixInventory::new("custom", Vec::new(), Vec::new())?;
        let mut section = Section::Header;
        let mut limits = (DEFAULT_MAX_PREFIX_RUN, DEFAULT_MAX_SUFFIX_RUN, DEFAULT_MIN_STEM_LEN);
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "[prefixes]" => {
                    section = Section::Prefixes;
                    continue;
                }
                "[suffixes]" => {
                    section = Section::Suffixes;
                    continue;
                }
                _ if line.starts_with('[') => {
                    return Err(Error::at(origin, lineno, format!("unknown section {line}")));
                }
                _ => {}
            }
            match section {
                Section::Header => {
                    let (key, value) = line.split_once('=').ok_or_else(|| {
                        Error::at(origin, lineno, format!("expected key=value or section, got {line:?}"))
                    })?;
                    let (key, value) = (key.trim(), value.trim());
                    let count = |v: &str| -> Result<usize> {
                        v.parse().map_err(|_| {
                            Error::at(origin, lineno, format!("{key} must be a count, got {v:?}"))
                        })
                    };
                    match key {
                        "dialect" => inv.dialect = value.to_string(),
                        "max_prefix_run" => limits.0 = count(value)?,
                        "max_suffix_run" => limits.1 = count(value)?,
                        "min_stem_len" => limits.2 = count(value)?,
                        _ => {
                            return Err(Error::at(origin, lineno, format!("unknown key {key:?}")));
                        }
                    }
                }
                Section::Prefixes => inv.push_affix(line.to_string(), true, Some((origin, lineno)))?,
                Section::Suffixes => inv.push_affix(line.to_string(), false, Some((origin, lineno)))?,
            }
        }
        inv.with_limits(limits.0, limits.1, limits.2).map_err(|_| {
            Error::validation(format!("{origin}: run limits and minimum stem length must be at least 1"))
        })
    }

    /// Loads an inventory file from disk.
    pub fn load(path: &Path) -> Result<AffixInventory> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        AffixInventory::parse(&text, &path.display().to_string())
    }

    /// Renders the inventory in the file format [`parse`] accepts;
    /// `parse(to_file_string())` reproduces the inventory exactly.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("dialect={}\n", self.dialect));
        out.push_str(&format!("max_prefix_run={}\n", self.max_prefix_run));
        out.push_str(&format!("max_suffix_run={}\n", self.max_suffix_run));
        out.push_str(&format!("min_stem_len={}\n", self.min_stem_len));
        out.push_str("\n[prefixes]\n");
        for a in &self.prefixes {
            out.push_str(a);
            out.push('\n');
        }
        out.push_str("\n[suffixes]\n");
        for a in &self.suffixes {
            out.push_str(a);
            out.push('\n');
        }
        out
    }

    /// The inventories shipped with the crate.
    pub fn builtin_names() -> &'static [&'static str] {
        &["msa", "egyptian", "levantine", "gulf", "maghrebi"]
    }

    /// Loads one of the shipped inventories by dialect name.
    pub fn builtin(name: &str) -> Result<AffixInventory> {
        let text = match name {
            "msa" => include_str!("../data/inventories/msa.inv"),
            "egyptian" => include_str!("../data/inventories/egyptian.inv"),
            "levantine" => include_str!("../data/inventories/levantine.inv"),
            "gulf" => include_str!("../data/inventories/gulf.inv"),
            "maghrebi" => include_str!("../data/inventories/maghrebi.inv"),
            _ => {
                return Err(Error::validation(format!(
                    "unknown dialect {name:?}; shipped inventories: {}",
                    AffixInventory::builtin_names().join(", ")
                )))
            }
        };
        AffixInventory::parse(text, &format!("<builtin:{name}>"))
    }

    pub fn dialect(&self) -> &str {
        &self.dialect
    }

    pub fn prefixes(&self) -> &[String] {
        &self.prefixes
    }

    pub fn suffixes(&self) -> &[String] {
        &self.suffixes
    }

    pub fn is_prefix(&self, s: &str) -> bool {
        self.prefix_set.contains(s)
    }

    pub fn is_suffix(&self, s: &str) -> bool {
        self.suffix_set.contains(s)
    }

    pub fn max_prefix_run(&self) -> usize {
        self.max_prefix_run
    }

    pub fn max_suffix_run(&self) -> usize {
        self.max_suffix_run
    }

    pub fn min_stem_len(&self) -> usize {
        self.min_stem_len
    }
}

/// Every candidate segmentation of one word, in lexicographic order of
/// split points (so the unsegmented word is always first), optionally
/// with the gold candidate's index marked.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    word: String,
    candidates: Vec<Segmentation>,
    gold_index: Option<usize>,
}

impl CandidateSet {
    pub fn word(&self) -> &str {
        &self.word
    }

    pub fn candidates(&self) -> &[Segmentation] {
        &self.candidates
    }

    pub fn gold_index(&self) -> Option<usize> {
        self.gold_index
    }

    pub fn gold(&self) -> Option<&Segmentation> {
        self.gold_index.map(|i| &self.candidates[i])
    }

    /// Finds the candidate with the same split points as `seg`.
    pub fn find_split(&self, seg: &Segmentation) -> Option<usize> {
        self.candidates.iter().position(|c| c.same_split(seg))
    }

    /// Marks the gold candidate; returns false (and clears the mark)
    /// when the gold split is not in the candidate set, e.g. because it
    /// uses an out-of-inventory affix.
    pub fn set_gold(&mut self, gold: &Segmentation) -> bool {
        self.gold_index = self.find_split(gold);
        self.gold_index.is_some()
    }
}

/// Enumerates every decomposition `prefix* + stem + suffix*` of `word`
/// where each affix is in the inventory, affix runs respect the
/// inventory's limits, and the stem has at least `min_stem_len`
/// characters. The unsegmented word is always a candidate, so the set is
/// never empty. Candidates are distinct splits in lexicographic order of
/// their split-point vectors; each carries the role assignment with the
/// most prefixes (then the most suffixes) among its valid readings.
pub fn generate_candidates(word: &str, inv: &AffixInventory) -> CandidateSet {
    let chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    if n == 0 {
        return CandidateSet { word: String::new(), candidates: Vec::new(), gold_index: None };
    }
    let min_stem = inv.min_stem_len().max(1);
    let pre_cv: Vec<Vec<char>> = inv.prefixes.iter().map(|p| p.chars().collect()).collect();
    let suf_cv: Vec<Vec<char>> = inv.suffixes.iter().map(|s| s.chars().collect()).collect();

    // All chains of stacked prefixes: (end position, boundary offsets).
    let mut prefix_chains: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut stack = vec![(0usize, Vec::new())];
    while let Some((i, bounds)) = stack.pop() {
        prefix_chains.push((i, bounds.clone()));
        if bounds.len() == inv.max_prefix_run {
            continue;
        }
        for pc in &pre_cv {
            let end = i + pc.len();
            if end + min_stem <= n && chars[i..end] == pc[..] {
                let mut next = bounds.clone();
                next.push(end);
                stack.push((end, next));
            }
        }
    }

    // All chains of stacked suffixes: (start position, ascending piece
    // start offsets).
    let mut suffix_chains: Vec<(usize, Vec<usize>)> = Vec::new();
    stack = vec![(n, Vec::new())];
    while let Some((j, bounds)) = stack.pop() {
        suffix_chains.push((j, bounds.clone()));
        if bounds.len() == inv.max_suffix_run {
            continue;
        }
        for sc in &suf_cv {
            if sc.len() + min_stem <= j && chars[j - sc.len()..j] == sc[..] {
                let mut next = vec![j - sc.len()];
                next.extend_from_slice(&bounds);
                stack.push((j - sc.len(), next));
            }
        }
    }

    // Pair prefix and suffix chains; keep one candidate per distinct
    // split vector, preferring the reading with more prefixes. The
    // BTreeMap supplies the lexicographic output order.
    let mut best: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    best.insert(Vec::new(), 0);
    for (i, pb) in &prefix_chains {
        for (j, sb) in &suffix_chains {
            if j < i || j - i < min_stem {
                continue;
            }
            let mut split = pb.clone();
            split.extend_from_slice(sb);
            let p = pb.len();
            best.entry(split).and_modify(|cur| *cur = (*cur).max(p)).or_insert(p);
        }
    }

    let candidates = best
        .into_iter()
        .map(|(split, stem_index)| {
            let mut pieces = Vec::with_capacity(split.len() + 1);
            let mut prev = 0;
            for &b in split.iter().chain(std::iter::once(&n)) {
                pieces.push(chars[prev..b].iter().collect());
                prev = b;
            }
            Segmentation::from_pieces(pieces, stem_index)
                .expect("generated pieces are non-empty by construction")
        })
        .collect();
    CandidateSet { word: word.to_string(), candidates, gold_index: None }
}

/// Labels each character of the segmented word: a 1-character piece is
/// `S`; a longer piece is `B`, `M`..., `E`.
pub fn encode_labels(seg: &Segmentation) -> Vec<Label> {
    let mut out = Vec::new();
    for piece in seg.pieces() {
        let len = piece.chars().count();
        if len == 1 {
            out.push(Label::S);
        } else {
            out.push(Label::B);
            out.extend(std::iter::repeat(Label::M).take(len - 2));
            out.push(Label::E);
        }
    }
    out
}

/// Result of [`decode_labels`]: the recovered segmentation, and whether
/// the label sequence violated the transition rules and had to be
/// repaired.
#[derive(Debug, Clone)]
pub struct Decoded {
    pub seg: Segmentation,
    pub repaired: bool,
}

/// Inverse of [`encode_labels`]: cuts the word after every `E` or `S`
/// and before every `B` or `S`, then assigns prefix/stem/suffix roles
/// from the inventory. For valid sequences the two cut rules agree;
/// their union is the repair rule for invalid ones (a `B`/`M` run with
/// no `E` ends at its last character, and an `M` without a preceding `B`
/// starts a segment), in which case `repaired` is set.
pub fn decode_labels(word: &str, labels: &[Label], inv: &AffixInventory) -> Result<Decoded> {
    let chars: Vec<char> = word.chars().collect();
    if chars.len() != labels.len() {
        return Err(Error::validation(format!(
            "word {word:?} has {} characters but {} labels",
            chars.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::validation("cannot decode an empty word"));
    }
    if labels.contains(&Label::WB) {
        return Err(Error::validation(format!(
            "WB label inside a single word {word:?}"
        )));
    }
    let repaired = !Label::sequence_is_valid(labels);
    let mut pieces = Vec::new();
    let mut start = 0;
    for (i, &label) in labels.iter().enumerate() {
        let boundary = matches!(label, Label::E | Label::S)
            || labels.get(i + 1).map_or(true, |next| matches!(next, Label::B | Label::S));
        if boundary {
            pieces.push(chars[start..=i].iter().collect());
            start = i + 1;
        }
    }
    Ok(Decoded { seg: assign_roles(pieces, inv), repaired })
}

/// Assigns prefix/stem/suffix roles to a piece list. Among the
/// readings that are fully consistent with the inventory — every piece
/// but the stem is an affix, the run caps hold, and the stem meets the
/// minimum length — the one with the most prefixes wins, which
/// reproduces the canonical assignment of [`generate_candidates`] on
/// any split it emits. If no consistent reading exists, affixes are
/// matched greedily from the outside in and the longest unmatched
/// middle piece (leftmost on ties) becomes the stem — that keeps the
/// function total on out-of-inventory golds.
pub fn assign_roles(pieces: Vec<String>, inv: &AffixInventory) -> Segmentation {
    assert!(!pieces.is_empty(), "assign_roles requires at least one piece");
    let k = pieces.len();
    // Longest run of inventory prefixes available from the left.
    let mut max_p = 0;
    while max_p < k - 1 && max_p < inv.max_prefix_run() && inv.is_prefix(&pieces[max_p]) {
        max_p += 1;
    }
    for p in (0..=max_p).rev() {
        let consistent = k - 1 - p <= inv.max_suffix_run()
            && pieces[p + 1..].iter().all(|f| inv.is_suffix(f))
            && pieces[p].chars().count() >= inv.min_stem_len();
        if consistent {
            return Segmentation::from_pieces(pieces, p).expect("pieces validated by caller");
        }
    }
    let mut s = 0;
    while s < k - 1 - max_p && s < inv.max_suffix_run() && inv.is_suffix(&pieces[k - 1 - s]) {
        s += 1;
    }
    // Pick the longest piece of the unmatched middle as the stem.
    let rest = &pieces[max_p..k - s];
    let longest = rest
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            (a.chars().count(), std::cmp::Reverse(ia)) // leftmost wins ties
                .cmp(&(b.chars().count(), std::cmp::Reverse(ib)))
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    Segmentation::from_pieces(pieces, max_p + longest).expect("pieces validated by caller")
}
