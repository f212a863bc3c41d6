//! The segmented-tweet corpus format and its in-memory form.
//!
//! A corpus file is plain UTF-8 text:
//!
//! ```text
//! #dialect=egyptian
//! #script=buckwalter
//! w+mn hnAk @user1 b+yqwl+k
//! mA+tnsA$ ...
//! ```
//!
//! Two header lines (either order) name the dialect and the script of
//! the file; every following non-empty line is one tweet, its tokens
//! separated by single spaces, each word's segments joined by `+`. A
//! literal `+` inside a token is escaped `\+` and a literal backslash
//! `\\`. Mentions, hashtags, URLs, punctuation, and emoji are
//! pass-through tokens and must not carry segment marks.
//!
//! Internally every token is held in Buckwalter transliteration
//! (conversion is strictly one character to one character, so segment
//! boundaries carry over); the raw file spelling is kept too, which
//! makes save ∘ load the identity on valid files.

use std::path::Path;

use crate::affixes::{AffixInventory, Segmentation};
use crate::error::{Error, Result};
use crate::textnorm::{classify_token, to_buckwalter, TokenClass};

/// Script a corpus file is written in. The in-memory form is always
/// Buckwalter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Script {
    Arabic,
    Buckwalter,
}

impl std::fmt::Display for Script {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Script::Arabic => "arabic",
            Script::Buckwalter => "buckwalter",
        })
    }
}

impl std::str::FromStr for Script {
    type Err = Error;

    fn from_str(s: &str) -> Result<Script> {
        match s {
            "arabic" => Ok(Script::Arabic),
            "buckwalter" => Ok(Script::Buckwalter),
            other => Err(Error::validation(format!(
                "unknown script {other:?} (expected \"arabic\" or \"buckwalter\")"
            ))),
        }
    }
}

/// One token of a tweet: its raw file spelling, its class, and its
/// gold segmentation over the Buckwalter form. Pass-through (non-word)
/// tokens always hold the trivial segmentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    raw: String,
    class: TokenClass,
    gold: Segmentation,
}

impl Token {
    /// Builds a token, enforcing the two corpus invariants: the gold
    /// segmentation must spell the Buckwalter form of `raw`, and only
    /// word tokens may be segmented.
    pub fn new(raw: impl Into<String>, gold: Segmentation) -> Result<Token> {
        let raw: String = raw.into();
        if raw.is_empty() {
            return Err(Error::validation("empty token"));
        }
        let class = classify_token(&raw);
        if class != TokenClass::Word && gold.num_segments() > 1 {
            return Err(Error::validation(format!(
                "pass-through token {raw:?} must not be segmented"
            )));
        }
        let bw = to_buckwalter(&raw);
        if gold.surface() != bw {
            return Err(Error::validation(format!(
                "segmentation {:?} does not spell token {raw:?}",
                gold.to_plus_string()
            )));
        }
        Ok(Token { raw, class, gold })
    }

    /// Word token from Buckwalter pieces with roles assigned by the
    /// inventory.
    pub fn word(pieces: Vec<String>, inv: &AffixInventory) -> Result<Token> {
        if pieces.is_empty() || pieces.iter().any(|p| p.is_empty()) {
            return Err(Error::validation("word token with an empty segment"));
        }
        let seg = crate::affixes::assign_roles(pieces, inv);
        Token::new(seg.surface(), seg)
    }

    /// Pass-through token (kept whole).
    pub fn pass_through(raw: impl Into<String>) -> Result<Token> {
        let raw: String = raw.into();
        let seg = Segmentation::unsegmented(&to_buckwalter(&raw));
        Token::new(raw, seg)
    }

    /// The spelling as it appeared in the file.
    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// The Buckwalter form of the whole token.
    pub fn bw(&self) -> String {
        self.gold.surface()
    }

    pub fn class(&self) -> TokenClass {
        self.class
    }

    pub fn is_word(&self) -> bool {
        self.class == TokenClass::Word
    }

    /// Gold segmentation (over the Buckwalter form).
    pub fn gold(&self) -> &Segmentation {
        &self.gold
    }

    /// Raw-script pieces, recovered by cutting `raw` at the gold split
    /// points (valid because transliteration is 1:1 per character).
    fn raw_pieces(&self) -> Vec<String> {
        let chars: Vec<char> = self.raw.chars().collect();
        let mut out = Vec::new();
        let mut start = 0;
        for p in self.gold.split_points() {
            out.push(chars[start..p].iter().collect());
            start = p;
        }
        out.push(chars[start..].iter().collect());
        out
    }
}

/// One line of the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Tweet {
    pub tokens: Vec<Token>,
}

impl Tweet {
    /// The Buckwalter word tokens with their golds, in order — the unit
    /// consumed by training.
    pub fn word_pairs(&self) -> Vec<(String, Segmentation)> {
        self.tokens
            .iter()
            .filter(|t| t.is_word())
            .map(|t| (t.bw(), t.gold().clone()))
            .collect()
    }
}

/// A segmented corpus: header metadata plus one [`Tweet`] per line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    dialect: String,
    script: Script,
    tweets: Vec<Tweet>,
}

impl Corpus {
    pub fn new(dialect: impl Into<String>, script: Script, tweets: Vec<Tweet>) -> Corpus {
        Corpus { dialect: dialect.into(), script, tweets }
    }

    pub fn dialect(&self) -> &str {
        &self.dialect
    }

    pub fn script(&self) -> Script {
        self.script
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    /// Total number of word (non-pass-through) tokens.
    pub fn word_count(&self) -> usize {
        self.tweets.iter().map(|t| t.tokens.iter().filter(|tok| tok.is_word()).count()).sum()
    }

    /// All word tokens as `(buckwalter surface, gold)` pairs, tweet
    /// order preserved.
    pub fn gold_words(&self) -> Vec<(String, Segmentation)> {
        self.tweets.iter().flat_map(|t| t.word_pairs()).collect()
    }

    /// Word pairs grouped per tweet — the shape the tagger trains on.
    pub fn tweet_word_pairs(&self) -> Vec<Vec<(String, Segmentation)>> {
        self.tweets.iter().map(|t| t.word_pairs()).collect()
    }

    /// A new corpus holding the tweets at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        Corpus {
            dialect: self.dialect.clone(),
            script: self.script,
            tweets: indices.iter().map(|&i| self.tweets[i].clone()).collect(),
        }
    }

    /// Renders the corpus in its file format.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("#dialect={}\n#script={}\n", self.dialect, self.script));
        for tweet in &self.tweets {
            let mut first = true;
            for token in &tweet.tokens {
                if !first {
                    out.push(' ');
                }
                first = false;
                if token.is_word() {
                    let pieces = token.raw_pieces();
                    for (i, piece) in pieces.iter().enumerate() {
                        if i > 0 {
                            out.push('+');
                        }
                        out.push_str(&escape(piece));
                    }
                } else {
                    out.push_str(&escape(&token.raw));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_file_string())
            .map_err(|e| Error::io(path.display().to_string(), e))
    }
}

fn escape(piece: &str) -> String {
    let mut out = String::with_capacity(piece.len());
    for c in piece.chars() {
        if c == '+' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Splits a token's text on unescaped `+` and resolves `\+` and `\\`.
fn unescape_pieces(text: &str, path: &str, line: usize) -> Result<Vec<String>> {
    let mut pieces = vec![String::new()];
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some(esc @ ('+' | '\\')) => pieces.last_mut().unwrap().push(esc),
                Some(other) => {
                    return Err(Error::at(
                        path,
                        line,
                        format!("unknown escape \\{other} in token {text:?}"),
                    ))
                }
                None => {
                    return Err(Error::at(path, line, format!("dangling escape in token {text:?}")))
                }
            },
            '+' => pieces.push(String::new()),
            other => pieces.last_mut().unwrap().push(other),
        }
    }
    if pieces.iter().any(|p| p.is_empty()) {
        return Err(Error::at(
            path,
            line,
            format!("empty segment in token {text:?} (stray '+' or space?)"),
        ));
    }
    Ok(pieces)
}

/// Parses corpus text. `origin` names the source in errors. The dialect
/// header selects the affix inventory used to assign prefix/stem/suffix
/// roles when it matches a built-in inventory; otherwise roles default
/// to the longest-piece-as-stem rule.
pub fn parse_corpus(text: &str, origin: &str) -> Result<Corpus> {
    let mut dialect: Option<String> = None;
    let mut script: Option<Script> = None;
    let mut tweets = Vec::new();
    let mut role_inv: Option<AffixInventory> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if let Some(value) = line.strip_prefix("#dialect=") {
            if dialect.is_some() {
                return Err(Error::at(origin, line_no, "duplicate #dialect= header"));
            }
            if value.is_empty() {
                return Err(Error::at(origin, line_no, "empty #dialect= header"));
            }
            dialect = Some(value.to_string());
            continue;
        }
        if let Some(value) = line.strip_prefix("#script=") {
            if script.is_some() {
                return Err(Error::at(origin, line_no, "duplicate #script= header"));
            }
            script =
                Some(value.parse().map_err(|e: Error| Error::at(origin, line_no, e.to_string()))?);
            continue;
        }
        let (Some(dialect), Some(script)) = (&dialect, script) else {
            return Err(Error::at(
                origin,
                line_no,
                "corpus must start with #dialect= and #script= headers",
            ));
        };
        let inv = role_inv.get_or_insert_with(|| {
            AffixInventory::builtin(dialect)
                .unwrap_or_else(|_| AffixInventory::new(dialect, vec![], vec![]).unwrap())
        });
        let mut tweet = Tweet::default();
        for token_text in line.split(' ') {
            if token_text.is_empty() {
                return Err(Error::at(origin, line_no, "empty token (double space?)"));
            }
            let raw_pieces = unescape_pieces(token_text, origin, line_no)?;
            let surface_raw: String = raw_pieces.concat();
            let class = classify_token(&surface_raw);
            let token = if class == TokenClass::Word {
                let bw_pieces: Vec<String> = match script {
                    Script::Arabic => raw_pieces.iter().map(|p| to_buckwalter(p)).collect(),
                    Script::Buckwalter => raw_pieces.clone(),
                };
                let seg = crate::affixes::assign_roles(bw_pieces, inv);
                Token { raw: surface_raw, class, gold: seg }
            } else {
                if raw_pieces.len() > 1 {
                    return Err(Error::at(
                        origin,
                        line_no,
                        format!("pass-through token {surface_raw:?} must not be segmented"),
                    ));
                }
                let seg = Segmentation::unsegmented(&to_buckwalter(&surface_raw));
                Token { raw: surface_raw, class, gold: seg }
            };
            tweet.tokens.push(token);
        }
        tweets.push(tweet);
    }
    let dialect = dialect.ok_or_else(|| Error::at(origin, 1, "missing #dialect= header"))?;
    let script = script.ok_or_else(|| Error::at(origin, 1, "missing #script= header"))?;
    Ok(Corpus { dialect, script, tweets })
}

/// Loads a corpus file. See the module docs for the format.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_corpus(&text, &path.display().to_string())
}
