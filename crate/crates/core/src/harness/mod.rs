//! The experiment harness: corpus I/O, fold planning, evaluation,
//! synthetic data, and the cross-validation grid that ties the two
//! segmenters and the lookup schemes together.

pub mod corpus;
pub mod crossval;
pub mod eval;
pub mod folds;
pub mod synth;

pub use corpus::{load_corpus, parse_corpus, Corpus, Script, Token, Tweet};
pub use crossval::{crossval, CrossvalConfig, CrossvalResults, SystemKind};
pub use eval::{coda_match_stat, evaluate, ErrorBuckets, EvalReport};
pub use folds::{split_folds, Fold, FoldPlan};
pub use synth::{generate_synthetic_corpus, Grammar};
