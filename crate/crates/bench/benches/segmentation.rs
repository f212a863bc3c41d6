//! Microbenchmarks for the hot paths of both segmenters: candidate
//! enumeration, feature scoring, neural decoding, and lookup
//! resolution. Models are trained once per process on a small
//! synthetic corpus so the numbers reflect inference, not training.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use daseg::affixes::generate_candidates;
use daseg::features::{build_stats, featurize, LexiconSet};
use daseg::harness::{generate_synthetic_corpus, Grammar};
use daseg::neural::{tag_words, train_tagger};
use daseg::ranker::{ranking_instances, segment_with_ranker, train_ranker};
use daseg::{AffixInventory, Hyperparams, LookupTable, Scheme, Segmentation};

fn bench_candidates(c: &mut Criterion) {
    let inv = AffixInventory::builtin("egyptian").unwrap();
    c.bench_function("generate_candidates/wmAbyqwlhA$", |b| {
        b.iter(|| generate_candidates(black_box("wmAbyqwlhA$"), &inv))
    });
}

fn bench_ranker(c: &mut Criterion) {
    let grammar = Grammar::builtin();
    let corpus = generate_synthetic_corpus(grammar, 400, 1).unwrap();
    let inv = grammar.inventory();
    let lex = LexiconSet::builtin();
    let pairs = corpus.gold_words();
    let stats = build_stats(&pairs, 0.01).unwrap();
    let (instances, _) = ranking_instances(&pairs, &inv, &stats, &lex).unwrap();
    let ranker = train_ranker(&instances, 10.0, 10, 0).unwrap();

    let cand = generate_candidates("wAlqlbhA", &inv);
    let seg = &cand.candidates()[cand.candidates().len() / 2];
    c.bench_function("featurize/wAlqlbhA", |b| {
        b.iter(|| featurize(black_box(seg), &stats, &lex))
    });
    c.bench_function("segment_with_ranker/wAlqlbhA", |b| {
        b.iter(|| segment_with_ranker(black_box("wAlqlbhA"), &ranker, &inv, &stats, &lex))
    });
}

fn bench_tagger(c: &mut Criterion) {
    let grammar = Grammar::builtin();
    let corpus = generate_synthetic_corpus(grammar, 150, 2).unwrap();
    let inv = grammar.inventory();
    let tweets = corpus.tweet_word_pairs();
    let hp = Hyperparams {
        d: 16,
        h: 24,
        max_epochs: 3,
        patience: 1,
        batch_size: 16,
        ..Hyperparams::default()
    };
    let (params, _) = train_tagger(&tweets[1..], &tweets[..1], &inv, &hp).unwrap();
    let words: Vec<String> =
        ["wAlqlb", "byktbhA", "mAqAl$", "hdf"].iter().map(|w| w.to_string()).collect();
    c.bench_function("tag_words/4-word-tweet", |b| {
        b.iter(|| tag_words(&params, black_box(&words), &inv))
    });
}

fn bench_lookup(c: &mut Criterion) {
    let grammar = Grammar::builtin();
    let corpus = generate_synthetic_corpus(grammar, 2000, 3).unwrap();
    let msa = generate_synthetic_corpus(grammar, 1000, 4).unwrap();
    let (table, _) =
        LookupTable::build(&corpus.gold_words(), Some(&msa.gold_words()), false).unwrap();
    let hit = corpus.gold_words()[17].0.clone();
    c.bench_function("lookup_resolve/hit", |b| {
        b.iter(|| {
            table.resolve(black_box(&hit), Scheme::DaMsa, |w| Segmentation::unsegmented(w))
        })
    });
    c.bench_function("lookup_resolve/miss", |b| {
        b.iter(|| {
            table.resolve(black_box("zzzzzz"), Scheme::DaMsa, |w| Segmentation::unsegmented(w))
        })
    });
}

criterion_group!(benches, bench_candidates, bench_ranker, bench_tagger, bench_lookup);
criterion_main!(benches);
