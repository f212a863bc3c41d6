//! Buckwalter transliteration, orthographic normalization, and token
//! classification for raw social-media Arabic.
//!
//! Everything downstream of this module works on the Buckwalter encoding:
//! one ASCII byte per Arabic letter, which keeps candidate enumeration and
//! exact-match tables simple. Conversion is lossless on the mapped
//! alphabet, so output can be emitted back in the script the input used.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// The standard Buckwalter table: `(ascii, arabic)` pairs, bijective.
///
/// Covers the Arabic letters, the eight harakat, tatweel, dagger alef,
/// alef wasla, and the four extension letters (پ چ ڤ گ). Characters not
/// listed here pass through transliteration unchanged in both directions.
const BUCKWALTER: &[(char, char)] = &[
    ('\'', 'ء'),
    ('|', 'آ'),
    ('>', 'أ'),
    ('&', 'ؤ'),
    ('<', 'إ'),
    ('}', 'ئ'),
    ('A', 'ا'),
    ('b', 'ب'),
    ('p', 'ة'),
    ('t', 'ت'),
    ('v', 'ث'),
    ('j', 'ج'),
    ('H', 'ح'),
    ('x', 'خ'),
    ('d', 'د'),
    ('*', 'ذ'),
    ('r', 'ر'),
    ('z', 'ز'),
    ('s', 'س'),
    ('$', 'ش'),
    ('S', 'ص'),
    ('D', 'ض'),
    ('T', 'ط'),
    ('Z', 'ظ'),
    ('E', 'ع'),
    ('g', 'غ'),
    ('_', 'ـ'),
    ('f', 'ف'),
    ('q', 'ق'),
    ('k', 'ك'),
    ('l', 'ل'),
    ('m', 'م'),
    ('n', 'ن'),
    ('h', 'ه'),
    ('w', 'و'),
    ('Y', 'ى'),
    ('y', 'ي'),
    ('F', 'ً'),
    ('N', 'ٌ'),
    ('K', 'ٍ'),
    ('a', 'َ'),
    ('u', 'ُ'),
    ('i', 'ِ'),
    ('~', 'ّ'),
    ('o', 'ْ'),
    ('`', 'ٰ'),
    ('{', 'ٱ'),
    ('P', 'پ'),
    ('J', 'چ'),
    ('V', 'ڤ'),
    ('G', 'گ'),
];

/// Buckwalter symbols that stand for letters (as opposed to harakat,
/// tatweel, or the dagger alef). Several of them are ASCII punctuation,
/// so token classification must consult this set rather than
/// `is_ascii_punctuation` alone.
const BW_LETTERS: &str = "'|><&}AbptvjHxd*rzs$SDTZEgfqklmnhwYy{PJVG";

fn ar_of_bw() -> &'static BTreeMap<char, char> {
    static MAP: OnceLock<BTreeMap<char, char>> = OnceLock::new();
    MAP.get_or_init(|| BUCKWALTER.iter().copied().collect())
}

fn bw_of_ar() -> &'static BTreeMap<char, char> {
    static MAP: OnceLock<BTreeMap<char, char>> = OnceLock::new();
    MAP.get_or_init(|| BUCKWALTER.iter().map(|&(b, a)| (a, b)).collect())
}

/// Transliterates Arabic script to Buckwalter, character by character.
/// Total: anything outside the table (Latin, digits, punctuation, emoji)
/// is passed through unchanged.
///
/// ```
/// assert_eq!(daseg::textnorm::to_buckwalter("قلبه"), "qlbh");
/// ```
pub fn to_buckwalter(text: &str) -> String {
    text.chars()
        .map(|c| bw_of_ar().get(&c).copied().unwrap_or(c))
        .collect()
}

/// Inverse of [`to_buckwalter`] on its image; unmapped characters pass
/// through unchanged.
pub fn from_buckwalter(text: &str) -> String {
    text.chars()
        .map(|c| ar_of_bw().get(&c).copied().unwrap_or(c))
        .collect()
}

/// True for characters that count as letters for elongation and token
/// classification: anything Unicode considers alphabetic, plus the
/// Buckwalter letter symbols.
pub(crate) fn is_letter(c: char) -> bool {
    c.is_alphabetic() || BW_LETTERS.contains(c)
}

/// True for Buckwalter letter symbols and the Arabic letters they
/// encode — the alphabet "proper" Arabic words are spelled in.
pub(crate) fn is_arabic_letter(c: char) -> bool {
    BW_LETTERS.contains(c) || bw_of_ar().contains_key(&c)
}

/// A single-character folding table for the "matching" normal form:
/// alef variants to bare alef, alef maqsura to ya, ta marbuta to ha,
/// non-Arabic lookalikes folded, harakat and tatweel removed.
///
/// The built-in table (see `data/norm/matching.tsv`) carries each fold in
/// both Buckwalter and raw-script form, so the normal form is the same
/// whichever encoding it is applied in. A replacement table can be loaded
/// from a file of `from<TAB>to` lines (UTF-8; `#` lines are comments; a
/// line with no target deletes the character). Loading rejects tables
/// whose output could change under a second pass, which is what makes
/// [`MatchingTable::normalize`] idempotent by construction.
#[derive(Debug, Clone)]
pub struct MatchingTable {
    map: BTreeMap<char, Option<char>>,
}

impl MatchingTable {
    /// The table shipped with the crate.
    pub fn builtin() -> &'static MatchingTable {
        static TABLE: OnceLock<MatchingTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            MatchingTable::parse(include_str!("../data/norm/matching.tsv"), "<builtin>")
                .expect("built-in matching table must parse")
        })
    }

    /// Parses a table from text. `origin` is used in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<MatchingTable> {
        let mut map: BTreeMap<char, Option<char>> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let (from, to) = match line.split_once('\t') {
                Some((f, t)) => (f, t),
                None => (line, ""),
            };
            let mut from_chars = from.chars();
            let from = match (from_chars.next(), from_chars.next()) {
                (Some(c), None) => c,
                _ => {
                    return Err(Error::at(
                        origin,
                        lineno,
                        format!("source of a mapping must be one character, got {from:?}"),
                    ))
                }
            };
            let mut to_chars = to.chars();
            let to = match (to_chars.next(), to_chars.next()) {
                (None, _) => None,
                (Some(c), None) => Some(c),
                _ => {
                    return Err(Error::at(
                        origin,
                        lineno,
                        format!("target of a mapping must be empty or one character, got {to:?}"),
                    ))
                }
            };
            if map.insert(from, to).is_some() {
                return Err(Error::at(origin, lineno, format!("duplicate mapping for {from:?}")));
            }
        }
        // A target that is itself a source would make a second pass differ
        // from the first; reject such tables instead of normalizing twice.
        for (&from, &to) in &map {
            if let Some(t) = to {
                if map.contains_key(&t) {
                    return Err(Error::validation(format!(
                        "matching table is not closed: {from:?} maps to {t:?}, which is itself remapped"
                    )));
                }
            }
        }
        Ok(MatchingTable { map })
    }

    /// Loads a replacement table from a file.
    pub fn load(path: &Path) -> Result<MatchingTable> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        MatchingTable::parse(&text, &path.display().to_string())
    }

    /// Applies the folding to one token. Idempotent and never longer than
    /// the input (every mapping is one character to at most one).
    pub fn normalize(&self, token: &str) -> String {
        token
            .chars()
            .filter_map(|c| match self.map.get(&c) {
                Some(&to) => to,
                None => Some(c),
            })
            .collect()
    }
}

/// [`MatchingTable::normalize`] with the built-in table.
///
/// ```
/// assert_eq!(daseg::textnorm::normalize_matching(">nA"), "AnA");
/// ```
pub fn normalize_matching(token: &str) -> String {
    MatchingTable::builtin().normalize(token)
}

/// Collapses stylistic letter elongation: any run of three or more
/// identical letters becomes a single letter. Runs of exactly two are
/// kept, since doubled letters can be real morphology; runs of
/// non-letters (punctuation, digits) are left alone.
///
/// ```
/// assert_eq!(daseg::textnorm::reduce_elongation("lyyyyh"), "lyh");
/// ```
pub fn reduce_elongation(token: &str) -> String {
    let mut out = String::with_capacity(token.len());
    let mut run_char: Option<char> = None;
    let mut run_len = 0usize;
    let flush = |out: &mut String, c: char, len: usize| {
        let keep = if len >= 3 && is_letter(c) { 1 } else { len };
        for _ in 0..keep {
            out.push(c);
        }
    };
    for c in token.chars() {
        match run_char {
            Some(r) if r == c => run_len += 1,
            Some(r) => {
                flush(&mut out, r, run_len);
                run_char = Some(c);
                run_len = 1;
            }
            None => {
                run_char = Some(c);
                run_len = 1;
            }
        }
    }
    if let Some(r) = run_char {
        flush(&mut out, r, run_len);
    }
    out
}

/// What kind of thing a whitespace-free token is. Only `Word` tokens are
/// eligible for segmentation; everything else passes through a segmenter
/// untouched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TokenClass {
    Word,
    Mention,
    Hashtag,
    Url,
    Punct,
    /// Emoji, digit strings, and anything else that is neither lettered
    /// nor purely punctuation.
    EmojiOther,
}

/// Punctuation for classification purposes: ASCII punctuation that does
/// not double as a Buckwalter letter, plus the common Arabic and
/// typographic marks.
fn is_punct_char(c: char) -> bool {
    if BW_LETTERS.contains(c) {
        return false;
    }
    c.is_ascii_punctuation() || "،؛؟«»…—–·“”‘’٪".contains(c)
}

/// Classifies one token. Works on either script, since mentions,
/// hashtags, and URLs are ASCII-marked and letters are recognized in both
/// encodings.
///
/// ```
/// use daseg::textnorm::{classify_token, TokenClass};
/// assert_eq!(classify_token("@user1"), TokenClass::Mention);
/// assert_eq!(classify_token("byqwlk"), TokenClass::Word);
/// ```
pub fn classify_token(token: &str) -> TokenClass {
    let mut chars = token.chars();
    let first = chars.next();
    let rest = chars.as_str();
    match first {
        Some('@') if !rest.is_empty() => return TokenClass::Mention,
        Some('#') if !rest.is_empty() => return TokenClass::Hashtag,
        _ => {}
    }
    let lower = token.to_ascii_lowercase();
    if lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.") {
        return TokenClass::Url;
    }
    if !token.is_empty() && token.chars().all(is_punct_char) {
        return TokenClass::Punct;
    }
    if token.chars().any(is_letter) {
        return TokenClass::Word;
    }
    TokenClass::EmojiOther
}

/// Splits raw text into classified tokens: split on Unicode whitespace,
/// then peel leading and trailing punctuation runs off each chunk as
/// their own `Punct` tokens. Chunks that classify as mentions, hashtags,
/// or URLs are kept whole, punctuation and all.
pub fn tokenize(text: &str) -> Vec<(String, TokenClass)> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let class = classify_token(chunk);
        if matches!(class, TokenClass::Mention | TokenClass::Hashtag | TokenClass::Url) {
            out.push((chunk.to_string(), class));
            continue;
        }
        let chars: Vec<char> = chunk.chars().collect();
        let mut lead = 0;
        while lead < chars.len() && is_punct_char(chars[lead]) {
            lead += 1;
        }
        let mut trail = chars.len();
        while trail > lead && is_punct_char(chars[trail - 1]) {
            trail -= 1;
        }
        if lead > 0 {
            let s: String = chars[..lead].iter().collect();
            out.push((s, TokenClass::Punct));
        }
        if trail > lead {
            let s: String = chars[lead..trail].iter().collect();
            let c = classify_token(&s);
            out.push((s, c));
        }
        if trail < chars.len() {
            let s: String = chars[trail..].iter().collect();
            out.push((s, TokenClass::Punct));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn buckwalter_examples() {
        assert_eq!(to_buckwalter("قلبه"), "qlbh");
        assert_eq!(to_buckwalter("من"), "mn");
        assert_eq!(to_buckwalter(""), "");
        assert_eq!(from_buckwalter("qlbh"), "قلبه");
        assert_eq!(from_buckwalter(""), "");
    }

    #[test]
    fn buckwalter_passes_unmapped_through() {
        assert_eq!(to_buckwalter("@user1 :)"), "@user1 :)");
        // Round-tripping ASCII that happens to be Buckwalter goes through
        // Arabic and back without loss.
        assert_eq!(to_buckwalter(&from_buckwalter("byqwlk")), "byqwlk");
    }

    #[test]
    fn buckwalter_table_is_bijective() {
        let mut ascii: Vec<char> = BUCKWALTER.iter().map(|&(b, _)| b).collect();
        let mut arabic: Vec<char> = BUCKWALTER.iter().map(|&(_, a)| a).collect();
        ascii.sort_unstable();
        ascii.dedup();
        arabic.sort_unstable();
        arabic.dedup();
        assert_eq!(ascii.len(), BUCKWALTER.len());
        assert_eq!(arabic.len(), BUCKWALTER.len());
    }

    #[test]
    fn matching_examples() {
        assert_eq!(normalize_matching(">nA"), "AnA");
        assert_eq!(normalize_matching("mn"), "mn");
        assert_eq!(normalize_matching("qlbK"), "qlb");
        // Raw-script side of the same folds.
        assert_eq!(normalize_matching("أإآىة"), "ااايه");
        assert_eq!(normalize_matching("عربيـــة"), "عربيه");
    }

    #[test]
    fn matching_folds_lookalikes_in_both_scripts() {
        assert_eq!(normalize_matching("JVG"), "jfk");
        assert_eq!(normalize_matching("چڤگ"), "جفك");
        // Farsi kaf and yeh barree have no transliteration entry, so they
        // fold straight to Buckwalter.
        assert_eq!(normalize_matching("ک"), "k");
        assert_eq!(normalize_matching("ے"), "y");
    }

    #[test]
    fn matching_rejects_bad_tables() {
        assert!(MatchingTable::parse("ab\tc", "t").is_err());
        assert!(MatchingTable::parse("a\tbc", "t").is_err());
        assert!(MatchingTable::parse("a\tb\na\tc", "t").is_err());
        // Not closed: b is remapped, so a second pass would differ.
        assert!(MatchingTable::parse("a\tb\nb\tc", "t").is_err());
    }

    #[test]
    fn matching_table_loads_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("custom.tsv");
        std::fs::write(&path, "# custom\nX\tx\nZ\n").unwrap();
        let table = MatchingTable::load(&path).unwrap();
        assert_eq!(table.normalize("XZY"), "xY");
        assert!(MatchingTable::load(&dir.path().join("missing.tsv")).is_err());
    }

    #[test]
    fn elongation_examples() {
        assert_eq!(reduce_elongation(">KyyyyrrA"), ">KyrrA");
        assert_eq!(reduce_elongation("lyyyyh"), "lyh");
        assert_eq!(reduce_elongation("mn"), "mn");
        assert_eq!(reduce_elongation(""), "");
        // Doubles are legitimate gemination and survive.
        assert_eq!(reduce_elongation("mrr"), "mrr");
        // Non-letter runs are not elongation.
        assert_eq!(reduce_elongation("!!!"), "!!!");
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_token("@user1"), TokenClass::Mention);
        assert_eq!(classify_token("#مصر"), TokenClass::Hashtag);
        assert_eq!(classify_token("#mSr"), TokenClass::Hashtag);
        assert_eq!(classify_token("byqwlk"), TokenClass::Word);
        assert_eq!(classify_token("http://t.co/x"), TokenClass::Url);
        assert_eq!(classify_token("WWW.example.com"), TokenClass::Url);
        assert_eq!(classify_token("..."), TokenClass::Punct);
        assert_eq!(classify_token("،"), TokenClass::Punct);
        // '@' and '#' alone are just punctuation.
        assert_eq!(classify_token("@"), TokenClass::Punct);
        assert_eq!(classify_token("#"), TokenClass::Punct);
        // '$' is sheen in Buckwalter, so this is a word, not punctuation.
        assert_eq!(classify_token("$rbt"), TokenClass::Word);
        assert_eq!(classify_token("123"), TokenClass::EmojiOther);
        assert_eq!(classify_token("😂"), TokenClass::EmojiOther);
    }

    #[test]
    fn tokenize_peels_edge_punctuation() {
        let toks = tokenize("qAl: (byqwlk) #mSr @user1, http://t.co/x!");
        let expect = vec![
            ("qAl".to_string(), TokenClass::Word),
            (":".to_string(), TokenClass::Punct),
            ("(".to_string(), TokenClass::Punct),
            ("byqwlk".to_string(), TokenClass::Word),
            (")".to_string(), TokenClass::Punct),
            ("#mSr".to_string(), TokenClass::Hashtag),
            // Mentions/hashtags/URLs keep their punctuation.
            ("@user1,".to_string(), TokenClass::Mention),
            ("http://t.co/x!".to_string(), TokenClass::Url),
        ];
        assert_eq!(toks, expect);
    }

    /// A string drawn from the mapped Arabic alphabet.
    fn arabic_letters() -> impl Strategy<Value = String> {
        let alphabet: Vec<char> = BUCKWALTER.iter().map(|&(_, a)| a).collect();
        proptest::collection::vec(proptest::sample::select(alphabet), 0..40)
            .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn roundtrip_over_full_table(s in arabic_letters()) {
            prop_assert_eq!(from_buckwalter(&to_buckwalter(&s)), s);
        }

        #[test]
        fn matching_idempotent_and_non_increasing(s in "\\PC{0,40}") {
            let once = normalize_matching(&s);
            prop_assert_eq!(&normalize_matching(&once), &once);
            prop_assert!(once.chars().count() <= s.chars().count());
        }

        #[test]
        fn elongation_leaves_no_letter_runs(s in "\\PC{0,40}") {
            let reduced = reduce_elongation(&s);
            let chars: Vec<char> = reduced.chars().collect();
            for w in chars.windows(3) {
                prop_assert!(!(w[0] == w[1] && w[1] == w[2] && is_letter(w[0])));
            }
        }

        #[test]
        fn elongation_preserves_runs_below_three(s in "\\PC{0,40}") {
            // Applying the rule twice is the same as once.
            let once = reduce_elongation(&s);
            prop_assert_eq!(reduce_elongation(&once), once);
        }
    }
}
