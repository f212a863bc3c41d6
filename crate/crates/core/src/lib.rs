//! Word segmentation for dialectal Arabic social-media text.
//!
//! Splits a surface word in place into prefixes, a stem, and suffixes
//! (`byqwlk` -> `b+yqwl+k`) without altering or restoring any characters.
//! Two segmenters are provided:
//!
//! * a pairwise linear ranker over exhaustively generated affix splits
//!   ([`ranker`]), scored with corpus statistics and lexicon features
//!   ([`features`]), and
//! * a character-level bi-LSTM-CRF sequence tagger built from scratch
//!   ([`neural`]) over the `{B, M, E, S, WB}` label set.
//!
//! Both can be combined with word-level lookup memories ([`lookup`]) under
//! the `None` / `DA` / `DA+MSA` precedence schemes. [`harness`] holds the
//! corpus format, fold splitting, evaluation, synthetic corpus generation,
//! and the cross-validation driver; [`textnorm`] covers Buckwalter
//! transliteration, orthographic normalization, and social-media token
//! classification; [`archive`] serializes trained models to a
//! self-describing text container.

pub mod affixes;
pub mod archive;
pub mod error;
pub mod features;
pub mod harness;
pub mod lookup;
pub mod neural;
pub mod ranker;
pub mod textnorm;

pub use affixes::{AffixInventory, CandidateSet, Label, Segmentation};
pub use archive::{Model, ModelArchive};
pub use error::{Error, Result};
pub use features::{FeatureVector, LexiconSet, StatTables, FEATURE_NAMES};
pub use harness::{Corpus, CrossvalConfig, EvalReport, FoldPlan, Grammar, Script, SystemKind};
pub use lookup::{LookupTable, Scheme};
pub use neural::{Hyperparams, TaggerParams};
pub use ranker::LinearRanker;
pub use textnorm::TokenClass;
