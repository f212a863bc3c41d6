//! `daseg` — train, apply, and evaluate dialectal Arabic word
//! segmenters from the command line.
//!
//! One binary, seven subcommands: `train-ranker` and `train-tagger`
//! produce model archives; `segment` applies an archive to raw text;
//! `eval` scores an archive against a gold corpus; `crossval` runs the
//! full k-fold system × lookup-scheme grid; `synth` samples a corpus
//! from a grammar; `stats` summarizes a corpus file.
//!
//! Exit codes: 0 on success, 1 on any validation or I/O problem,
//! 2 when training diverges.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use daseg::features::{build_stats, LexiconSet};
use daseg::harness::{
    crossval, evaluate, generate_synthetic_corpus, load_corpus, Corpus, CrossvalConfig, Grammar,
};
use daseg::ranker::{ranking_instances, train_ranker, DEFAULT_C, DEFAULT_EPOCHS};
use daseg::textnorm::{to_buckwalter, tokenize, TokenClass};
use daseg::neural::train_tagger;
use daseg::{
    AffixInventory, Hyperparams, LookupTable, Model, ModelArchive, Scheme, Segmentation,
};

#[derive(Parser)]
#[command(
    name = "daseg",
    version,
    about = "Dialectal Arabic word segmentation: affix-split ranking and character tagging"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train the linear ranker over exhaustive affix splits.
    TrainRanker(TrainRankerArgs),
    /// Train the character-level neural tagger.
    TrainTagger(TrainTaggerArgs),
    /// Segment raw text (one tweet per line) with a trained model.
    Segment(SegmentArgs),
    /// Score a trained model against a gold corpus.
    Eval(EvalArgs),
    /// k-fold cross-validation over both systems and all lookup schemes.
    Crossval(CrossvalArgs),
    /// Sample a synthetic gold corpus from an affixation grammar.
    Synth(SynthArgs),
    /// Summarize a corpus file.
    Stats(StatsArgs),
}

/// Flags shared by every command that builds lookup tables.
#[derive(Args)]
struct LookupArgs {
    /// Gold corpus whose segmentations fill the MSA-side lookup table.
    #[arg(long, value_name = "CORPUS")]
    msa: Option<PathBuf>,
    /// Fold lookup keys (and queries) with the matching table.
    #[arg(long)]
    normalize_keys: bool,
}

#[derive(Args)]
struct TrainRankerArgs {
    /// Gold training corpus.
    corpus: PathBuf,
    /// Where to write the model archive.
    #[arg(long, value_name = "ARCHIVE")]
    out: PathBuf,
    /// Affix inventory: a built-in dialect name or a file path.
    /// Defaults to the corpus dialect.
    #[arg(long, value_name = "NAME|PATH")]
    inventory: Option<String>,
    /// Regularization trade-off C of the pairwise hinge objective.
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    /// Training epochs.
    #[arg(long, default_value_t = DEFAULT_EPOCHS)]
    epochs: usize,
    /// Seed for the instance shuffle.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Add-k smoothing constant for the statistic tables.
    #[arg(long, default_value_t = 0.01)]
    smoothing: f64,
    #[command(flatten)]
    lookup: LookupArgs,
}

#[derive(Args)]
struct TrainTaggerArgs {
    /// Gold training corpus. The last tenth of its tweets (at least
    /// one) is held out for early stopping.
    corpus: PathBuf,
    /// Where to write the model archive.
    #[arg(long, value_name = "ARCHIVE")]
    out: PathBuf,
    /// Affix inventory: a built-in dialect name or a file path.
    /// Defaults to the corpus dialect.
    #[arg(long, value_name = "NAME|PATH")]
    inventory: Option<String>,
    /// Character embedding dimension.
    #[arg(long, default_value_t = Hyperparams::default().d)]
    d: usize,
    /// LSTM hidden dimension (per direction).
    #[arg(long, default_value_t = Hyperparams::default().h)]
    h: usize,
    /// Learning rate.
    #[arg(long, default_value_t = Hyperparams::default().lr)]
    lr: f64,
    /// Momentum coefficient.
    #[arg(long, default_value_t = Hyperparams::default().momentum)]
    momentum: f64,
    /// Minibatch size in words.
    #[arg(long, default_value_t = Hyperparams::default().batch_size)]
    batch_size: usize,
    /// Dropout rate on the embedding and projection layers.
    #[arg(long, default_value_t = Hyperparams::default().dropout)]
    dropout: f64,
    /// Epoch cap.
    #[arg(long, default_value_t = Hyperparams::default().max_epochs)]
    max_epochs: usize,
    /// Early-stopping patience, in epochs without a dev improvement.
    #[arg(long, default_value_t = Hyperparams::default().patience)]
    patience: usize,
    /// Seed for initialization, shuffling, and dropout.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tag each word independently instead of as a tweet sequence.
    #[arg(long)]
    per_word: bool,
    /// Disable the diagonal peephole connections.
    #[arg(long)]
    no_peepholes: bool,
    #[command(flatten)]
    lookup: LookupArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum TextFormat {
    /// Render segment pieces in the script of the input text.
    Arabic,
    /// Transliterate segment pieces to Buckwalter.
    Buckwalter,
}

#[derive(Args)]
struct SegmentArgs {
    /// Model archive produced by train-ranker or train-tagger.
    #[arg(long, value_name = "ARCHIVE")]
    model: PathBuf,
    /// Lookup precedence: none, da, or da+msa.
    #[arg(long, default_value = "da+msa", value_parser = parse_scheme)]
    scheme: Scheme,
    /// Output script for the `+`-joined segments.
    #[arg(long, value_enum, default_value_t = TextFormat::Arabic)]
    format: TextFormat,
    /// Input text file, one tweet per line; stdin when omitted.
    input: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Model archive to score.
    #[arg(long, value_name = "ARCHIVE")]
    model: PathBuf,
    /// Gold corpus to score against.
    corpus: PathBuf,
    /// Lookup precedence: none, da, or da+msa.
    #[arg(long, default_value = "da+msa", value_parser = parse_scheme)]
    scheme: Scheme,
    /// Training corpus, for the seen-in-training rate.
    #[arg(long, value_name = "CORPUS")]
    training: Option<PathBuf>,
}

#[derive(Args)]
struct CrossvalArgs {
    /// Gold corpus to cross-validate on.
    corpus: PathBuf,
    /// Affix inventory: a built-in dialect name or a file path.
    /// Defaults to the corpus dialect.
    #[arg(long, value_name = "NAME|PATH")]
    inventory: Option<String>,
    /// Number of folds.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Master seed for fold splitting and per-fold training.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ranker regularization trade-off C.
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    /// Ranker training epochs.
    #[arg(long, default_value_t = DEFAULT_EPOCHS)]
    ranker_epochs: usize,
    /// Tagger character embedding dimension.
    #[arg(long, default_value_t = Hyperparams::default().d)]
    d: usize,
    /// Tagger LSTM hidden dimension (per direction).
    #[arg(long, default_value_t = Hyperparams::default().h)]
    h: usize,
    /// Tagger learning rate.
    #[arg(long, default_value_t = Hyperparams::default().lr)]
    lr: f64,
    /// Tagger minibatch size in words.
    #[arg(long, default_value_t = Hyperparams::default().batch_size)]
    batch_size: usize,
    /// Tagger dropout rate.
    #[arg(long, default_value_t = Hyperparams::default().dropout)]
    dropout: f64,
    /// Tagger epoch cap.
    #[arg(long, default_value_t = Hyperparams::default().max_epochs)]
    max_epochs: usize,
    /// Tagger early-stopping patience.
    #[arg(long, default_value_t = Hyperparams::default().patience)]
    patience: usize,
    /// Tag each word independently instead of as a tweet sequence.
    #[arg(long)]
    per_word: bool,
    /// Disable the tagger's peephole connections.
    #[arg(long)]
    no_peepholes: bool,
    /// Add-k smoothing constant for the ranker's statistic tables.
    #[arg(long, default_value_t = 0.01)]
    smoothing: f64,
    #[command(flatten)]
    lookup: LookupArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of words to sample.
    #[arg(long)]
    size: usize,
    /// RNG seed; the corpus is a pure function of grammar, size, seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the corpus (Buckwalter script).
    #[arg(long, value_name = "CORPUS")]
    out: PathBuf,
    /// Grammar file; the built-in grammar when omitted.
    #[arg(long, value_name = "PATH")]
    grammar: Option<PathBuf>,
    /// Also write the grammar's affix inventory, ready for --inventory
    /// in the training commands.
    #[arg(long, value_name = "PATH")]
    inventory_out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Corpus file to summarize.
    corpus: PathBuf,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: daseg::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let diverged = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<daseg::Error>(), Some(daseg::Error::Train(_))));
            ExitCode::from(if diverged { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::TrainRanker(a) => cmd_train_ranker(a),
        Cmd::TrainTagger(a) => cmd_train_tagger(a),
        Cmd::Segment(a) => cmd_segment(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Crossval(a) => cmd_crossval(a),
        Cmd::Synth(a) => cmd_synth(a),
        Cmd::Stats(a) => cmd_stats(a),
    }
}

/// Resolves `--inventory`: an existing path loads as a file, anything
/// else must be a built-in dialect name; absent means the corpus
/// dialect names a built-in.
fn resolve_inventory(arg: Option<&str>, dialect: &str) -> Result<AffixInventory> {
    match arg {
        Some(v) if Path::new(v).exists() => AffixInventory::load(Path::new(v)).map_err(Into::into),
        Some(name) => AffixInventory::builtin(name).map_err(Into::into),
        None => AffixInventory::builtin(dialect).with_context(|| {
            format!("corpus dialect {dialect:?} is not a built-in inventory; pass --inventory")
        }),
    }
}

/// DA table from the training corpus, MSA table from `--msa` if given.
fn build_lookup(corpus: &Corpus, args: &LookupArgs) -> Result<LookupTable> {
    let msa = args.msa.as_deref().map(load_corpus).transpose()?;
    let msa_pairs = msa.as_ref().map(|c| c.gold_words());
    let (table, conflicts) =
        LookupTable::build(&corpus.gold_words(), msa_pairs.as_deref(), args.normalize_keys)?;
    if !conflicts.is_empty() {
        eprintln!("note: {} surfaces had conflicting golds; kept the majority reading", conflicts.len());
    }
    Ok(table)
}

fn cmd_train_ranker(a: TrainRankerArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let inv = resolve_inventory(a.inventory.as_deref(), corpus.dialect())?;
    let pairs = corpus.gold_words();
    let lex = LexiconSet::builtin();
    let stats = build_stats(&pairs, a.smoothing)?;
    let (instances, skipped) = ranking_instances(&pairs, &inv, &stats, &lex)?;
    if skipped > 0 {
        eprintln!("note: {skipped} words whose gold split is outside the candidate space were skipped");
    }
    let ranker = train_ranker(&instances, a.c, a.epochs, a.seed)?;
    let lookup = build_lookup(&corpus, &a.lookup)?;
    let archive = ModelArchive { inventory: inv, model: Model::Ranker { ranker, stats }, lookup };
    archive.save(&a.out)?;
    println!(
        "trained ranker on {} words ({} ranking instances); wrote {}",
        pairs.len(),
        instances.len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_train_tagger(a: TrainTaggerArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let inv = resolve_inventory(a.inventory.as_deref(), corpus.dialect())?;
    if corpus.len() < 2 {
        bail!(
            "corpus has {} tweet(s); the tagger needs at least 2, one being held out for early stopping",
            corpus.len()
        );
    }
    let tweets = corpus.tweet_word_pairs();
    let split = corpus.len() - (corpus.len() / 10).max(1);
    let hp = Hyperparams {
        d: a.d,
        h: a.h,
        lr: a.lr,
        momentum: a.momentum,
        batch_size: a.batch_size,
        dropout: a.dropout,
        max_epochs: a.max_epochs,
        patience: a.patience,
        seed: a.seed,
        peepholes: !a.no_peepholes,
        per_word: a.per_word,
    };
    let (params, log) = train_tagger(&tweets[..split], &tweets[split..], &inv, &hp)?;
    let lookup = build_lookup(&corpus, &a.lookup)?;
    let archive = ModelArchive { inventory: inv, model: Model::Tagger(params), lookup };
    archive.save(&a.out)?;
    println!(
        "trained tagger for {} epochs (best dev accuracy {:.4} at epoch {}); wrote {}",
        log.epochs_run,
        log.dev_accuracy[log.best_epoch - 1],
        log.best_epoch,
        a.out.display()
    );
    Ok(())
}

/// Renders one segmented word in the script of its raw spelling by
/// slicing the raw characters along the Buckwalter piece boundaries
/// (the transliteration is one character to one character).
fn pieces_in_source_script(raw: &str, seg: &Segmentation) -> String {
    let chars: Vec<char> = raw.chars().collect();
    let mut out = Vec::with_capacity(seg.pieces().len());
    let mut off = 0;
    for piece in seg.pieces() {
        let n = piece.chars().count();
        let s: String = chars[off..off + n].iter().collect();
        out.push(s.replace('+', "\\+"));
        off += n;
    }
    out.join("+")
}

fn cmd_segment(a: SegmentArgs) -> Result<()> {
    let archive = ModelArchive::load(&a.model)?;
    let lex = LexiconSet::builtin();
    let text = match &a.input {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?,
        None => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf).context("reading stdin")?;
            buf
        }
    };
    for line in text.lines() {
        let tokens = tokenize(line);
        let words: Vec<String> = tokens
            .iter()
            .filter(|(_, class)| *class == TokenClass::Word)
            .map(|(raw, _)| to_buckwalter(raw))
            .collect();
        let mut segs = archive.segment_words(&words, a.scheme, &lex).into_iter();
        let rendered: Vec<String> = tokens
            .iter()
            .map(|(raw, class)| {
                if *class != TokenClass::Word {
                    return raw.clone();
                }
                let seg = segs.next().expect("one segmentation per word token");
                match a.format {
                    TextFormat::Arabic => pieces_in_source_script(raw, &seg),
                    TextFormat::Buckwalter => seg.to_plus_string(),
                }
            })
            .collect();
        println!("{}", rendered.join(" "));
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let archive = ModelArchive::load(&a.model)?;
    let gold = load_corpus(&a.corpus)?;
    let training = a.training.as_deref().map(load_corpus).transpose()?;
    let lex = LexiconSet::builtin();
    let mut outputs = Vec::with_capacity(gold.word_count());
    for tweet in gold.tweets() {
        let words: Vec<String> =
            tweet.tokens.iter().filter(|t| t.is_word()).map(|t| t.bw()).collect();
        outputs.extend(archive.segment_words(&words, a.scheme, &lex));
    }
    let report = evaluate(&outputs, &gold, training.as_ref())?;
    println!(
        "eval  system={}  scheme={}  dialect={}  corpus={}",
        archive.system(),
        a.scheme,
        gold.dialect(),
        a.corpus.display()
    );
    print!("{report}");
    println!();
    print!("{}", report.to_record());
    Ok(())
}

fn cmd_crossval(a: CrossvalArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let inv = resolve_inventory(a.inventory.as_deref(), corpus.dialect())?;
    let msa = a.lookup.msa.as_deref().map(load_corpus).transpose()?;
    let hp = Hyperparams {
        d: a.d,
        h: a.h,
        lr: a.lr,
        batch_size: a.batch_size,
        dropout: a.dropout,
        max_epochs: a.max_epochs,
        patience: a.patience,
        per_word: a.per_word,
        peepholes: !a.no_peepholes,
        ..Hyperparams::default()
    };
    let cfg = CrossvalConfig {
        k: a.k,
        seed: a.seed,
        c_param: a.c,
        ranker_epochs: a.ranker_epochs,
        hp,
        normalize_keys: a.lookup.normalize_keys,
        smoothing: a.smoothing,
    };
    let results = crossval(&corpus, &inv, msa.as_ref(), &cfg)?;
    print!("{}", results.report());
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let loaded;
    let grammar = match &a.grammar {
        Some(path) => {
            loaded = Grammar::load(path)?;
            &loaded
        }
        None => Grammar::builtin(),
    };
    let corpus = generate_synthetic_corpus(grammar, a.size, a.seed)?;
    corpus.save(&a.out)?;
    println!(
        "wrote {} tweets ({} words, dialect {}) to {}",
        corpus.len(),
        corpus.word_count(),
        corpus.dialect(),
        a.out.display()
    );
    if let Some(path) = &a.inventory_out {
        let inv = grammar.inventory();
        std::fs::write(path, inv.to_file_string())
            .with_context(|| format!("writing {}", path.display()))?;
        println!("wrote the grammar inventory to {}", path.display());
    }
    Ok(())
}

fn cmd_stats(a: StatsArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let mut class_counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut surfaces: BTreeMap<String, usize> = BTreeMap::new();
    let mut prefix_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut suffix_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut tokens = 0usize;
    let mut segments = 0usize;
    let mut multi = 0usize;
    for tweet in corpus.tweets() {
        for tok in &tweet.tokens {
            tokens += 1;
            let label = match tok.class() {
                TokenClass::Word => "words",
                TokenClass::Mention => "mentions",
                TokenClass::Hashtag => "hashtags",
                TokenClass::Url => "urls",
                TokenClass::Punct => "punctuation",
                TokenClass::EmojiOther => "other",
            };
            *class_counts.entry(label).or_default() += 1;
            if !tok.is_word() {
                continue;
            }
            let gold = tok.gold();
            *surfaces.entry(gold.surface()).or_default() += 1;
            segments += gold.num_segments();
            if gold.num_segments() > 1 {
                multi += 1;
            }
            for p in gold.prefixes() {
                *prefix_counts.entry(p.clone()).or_default() += 1;
            }
            for s in gold.suffixes() {
                *suffix_counts.entry(s.clone()).or_default() += 1;
            }
        }
    }
    let words = corpus.word_count();
    println!("corpus            {}", a.corpus.display());
    println!("dialect           {}", corpus.dialect());
    println!("script            {}", corpus.script());
    println!("tweets            {}", corpus.len());
    println!("tokens            {tokens}");
    for (label, count) in &class_counts {
        println!("  {label:<16}{count:>6}");
    }
    println!("distinct words    {}", surfaces.len());
    if words > 0 {
        println!("segments per word {:.3}", segments as f64 / words as f64);
        println!("segmented words   {:.1}%", 100.0 * multi as f64 / words as f64);
    }
    for (title, counts) in [("top prefixes", prefix_counts), ("top suffixes", suffix_counts)] {
        let mut ranked: Vec<(&String, &usize)> = counts.iter().collect();
        ranked.sort_by(|(wa, ca), (wb, cb)| cb.cmp(ca).then(wa.cmp(wb)));
        let row: Vec<String> =
            ranked.iter().take(5).map(|(w, c)| format!("{w} \u{00d7}{c}")).collect();
        println!("{title:<17} {}", if row.is_empty() { "none".to_string() } else { row.join("  ") });
    }
    Ok(())
}
