//! End-to-end tests that drive the `daseg` binary the way a user would:
//! sample a corpus, train both systems, segment text, evaluate, and
//! check the exit-code contract.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn daseg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_daseg"))
}

fn run(args: &[&str]) -> Output {
    daseg().args(args).output().expect("spawn daseg")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn path(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

/// Samples a corpus plus its matching inventory file and returns both
/// paths.
fn synth(dir: &tempfile::TempDir, name: &str, size: &str, seed: &str) -> (String, String) {
    let corpus = path(dir, name);
    let inv = path(dir, &format!("{name}.inv"));
    ok(&run(&[
        "synth",
        "--size",
        size,
        "--seed",
        seed,
        "--out",
        &corpus,
        "--inventory-out",
        &inv,
    ]));
    (corpus, inv)
}

#[test]
fn synth_is_deterministic_and_reports_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let (one, _) = synth(&dir, "one.txt", "150", "9");
    let (two, _) = synth(&dir, "two.txt", "150", "9");
    let (other, _) = synth(&dir, "other.txt", "150", "10");
    let bytes = std::fs::read(&one).unwrap();
    assert_eq!(bytes, std::fs::read(&two).unwrap());
    assert_ne!(bytes, std::fs::read(&other).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.starts_with("#dialect=egyptian\n#script=buckwalter\n"));

    let summary = ok(&run(&["stats", &one]));
    assert!(summary.contains("tweets"), "{summary}");
    assert!(summary.contains("words"), "{summary}");
}

#[test]
fn ranker_pipeline_segments_and_scores() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, inv) = synth(&dir, "da.txt", "200", "7");
    let (msa, _) = synth(&dir, "msa.txt", "120", "8");
    let model = path(&dir, "ranker.dsm");
    let trained = ok(&run(&[
        "train-ranker",
        &corpus,
        "--out",
        &model,
        "--inventory",
        &inv,
        "--msa",
        &msa,
        "--c",
        "10",
        "--epochs",
        "8",
        "--seed",
        "3",
    ]));
    assert!(trained.contains("trained ranker"), "{trained}");
    assert!(Path::new(&model).exists());

    // On its own training corpus under scheme da, the lookup table
    // answers every word, so accuracy is exactly 1.
    let eval = ok(&run(&[
        "eval", "--model", &model, &corpus, "--scheme", "da", "--training", &corpus,
    ]));
    assert!(eval.contains("word_accuracy=1\n"), "{eval}");
    assert!(eval.contains("seen_rate=1\n"), "{eval}");
    assert!(eval.contains("word accuracy"), "{eval}");
}

#[test]
fn tagger_pipeline_trains_and_scores() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, inv) = synth(&dir, "da.txt", "120", "11");
    let model = path(&dir, "tagger.dsm");
    let trained = ok(&run(&[
        "train-tagger",
        &corpus,
        "--out",
        &model,
        "--inventory",
        &inv,
        "--d",
        "6",
        "--h",
        "8",
        "--max-epochs",
        "2",
        "--patience",
        "1",
        "--batch-size",
        "8",
    ]));
    assert!(trained.contains("trained tagger"), "{trained}");
    let eval = ok(&run(&["eval", "--model", &model, &corpus, "--scheme", "da"]));
    assert!(eval.contains("word_accuracy=1\n"), "{eval}");
    assert!(eval.contains("seen_rate=none\n"), "{eval}");
}

#[test]
fn segment_reads_stdin_and_keeps_pass_through_tokens() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, inv) = synth(&dir, "da.txt", "150", "13");
    let model = path(&dir, "m.dsm");
    ok(&run(&[
        "train-ranker", &corpus, "--out", &model, "--inventory", &inv, "--epochs", "6",
    ]));

    let mut child = daseg()
        .args(["segment", "--model", &model, "--scheme", "da", "--format", "buckwalter"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all("wAlqlb . @user http://x.y\nbyktb\n".as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let text = ok(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let first: Vec<&str> = lines[0].split(' ').collect();
    // The word may gain '+' marks but spells the same letters; the
    // pass-through tokens come back verbatim, in order.
    assert_eq!(first[0].replace('+', ""), "wAlqlb");
    assert_eq!(&first[1..], [".", "@user", "http://x.y"]);
    assert_eq!(lines[1].replace('+', ""), "byktb");

    // Arabic in, Arabic out: segments are sliced from the raw spelling.
    let mut child = daseg()
        .args(["segment", "--model", &model])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all("والقلب".as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    let text = ok(&out);
    assert_eq!(text.trim_end().replace('+', ""), "والقلب");
}

#[test]
fn crossval_is_byte_deterministic_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, inv) = synth(&dir, "da.txt", "150", "17");
    let args = [
        "crossval",
        corpus.as_str(),
        "--inventory",
        inv.as_str(),
        "--k",
        "3",
        "--seed",
        "5",
        "--d",
        "6",
        "--h",
        "8",
        "--max-epochs",
        "1",
        "--patience",
        "1",
        "--batch-size",
        "8",
        "--ranker-epochs",
        "5",
    ];
    let first = ok(&run(&args));
    let second = ok(&run(&args));
    assert_eq!(first, second);
    assert!(first.contains("mean word accuracy"), "{first}");
    assert!(first.contains("ranker"), "{first}");
    assert!(first.contains("tagger"), "{first}");
}

#[test]
fn exit_codes_distinguish_validation_from_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, inv) = synth(&dir, "da.txt", "80", "19");

    // Missing model file: validation/IO problem, exit 1.
    let out = run(&["eval", "--model", &path(&dir, "nope.dsm"), &corpus]);
    assert_eq!(out.status.code(), Some(1));

    // Unknown scheme: usage error, exit 1.
    let out = run(&["eval", "--model", &path(&dir, "nope.dsm"), &corpus, "--scheme", "bogus"]);
    assert_eq!(out.status.code(), Some(1));

    // An absurd learning rate makes the tagger diverge: exit 2.
    let out = run(&[
        "train-tagger",
        &corpus,
        "--out",
        &path(&dir, "t.dsm"),
        "--inventory",
        &inv,
        "--d",
        "4",
        "--h",
        "4",
        "--max-epochs",
        "2",
        "--patience",
        "1",
        "--batch-size",
        "8",
        "--lr",
        "1e18",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    // --help is not an error.
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}
