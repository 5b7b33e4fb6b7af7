use std::fs;
use std::path::{Path, PathBuf};

use langspread::commands::{self, RunManifest, VectorSource, MANIFEST_FILE};
use langspread::config::Config;
use langspread::corpus::dataset_files;
use langspread::harness::{read_results, results_to_csv, Metrics, ResultRow};
use langspread::model::Setup;
use langspread::synth::{EchoFixtureOptions, SynthOptions};
use langspread::Error;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/raw")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/preprocess")
}

fn lexicon() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/lexicon/demo_lexicon.json")
}

fn tiny_config() -> Config {
    Config {
        min_count: 1,
        embedding_dim: 8,
        max_epochs: 4,
        ..Config::default()
    }
}

/// Set `UPDATE_GOLDEN=1` to rewrite the expected files.
#[test]
fn preprocessing_matches_golden_files() {
    let out = tempfile::tempdir().unwrap();
    let config = Config {
        dataset: "fixture".into(),
        min_count: 1,
        ..Config::default()
    };
    commands::preprocess(&fixture_dir(), out.path(), &config).unwrap();
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for name in dataset_files() {
        let got = fs::read_to_string(out.path().join(name)).unwrap();
        let path = golden_dir().join(name);
        if update {
            fs::write(&path, &got).unwrap();
        }
        let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
        assert_eq!(got, expected, "{name} drifted from its golden copy");
    }
}

#[test]
fn preprocessing_applies_the_user_rules() {
    let out = tempfile::tempdir().unwrap();
    let config = Config {
        min_count: 1,
        ..Config::default()
    };
    commands::preprocess(&fixture_dir(), out.path(), &config).unwrap();
    let news = fs::read_to_string(out.path().join("news.jsonl")).unwrap();
    let users = fs::read_to_string(out.path().join("users.jsonl")).unwrap();
    // u2 spreads two news; ghost has no record
    assert!(!news.contains("\"u2\"") && !users.contains("\"u2\""));
    assert!(!news.contains("ghost"));
    assert_eq!(news.lines().count(), 6);
    let vocab = fs::read_to_string(out.path().join("vocab.tsv")).unwrap();
    for special in ["<PAD>", "<UNK>", "<URL>", "<INT>", "<CAP>", "<EMOJI>"] {
        assert!(vocab.contains(special), "{special}");
    }
}

#[test]
fn missing_inputs_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config();
    let missing_raw = commands::preprocess(&dir.path().join("nope"), &dir.path().join("out"), &config).unwrap_err();
    assert_eq!(missing_raw.exit_code(), 2);

    let missing_data = commands::train(
        &dir.path().join("nope"),
        Some(Setup::News),
        &config,
        None,
        &dir.path().join("t"),
    )
    .unwrap_err();
    assert_eq!(missing_data.exit_code(), 3, "{missing_data}");

    commands::preprocess(&fixture_dir(), &dir.path().join("data"), &config).unwrap();
    let missing_ckpt = commands::interpret(
        &dir.path().join("data"),
        &dir.path().join("none.ckpt"),
        &lexicon(),
        &config,
        &dir.path().join("i"),
    )
    .unwrap_err();
    assert!(matches!(missing_ckpt, Error::MissingArtifact(_)));
    assert_eq!(missing_ckpt.exit_code(), 3);

    let no_setup = commands::train(&dir.path().join("data"), None, &config, None, &dir.path().join("t")).unwrap_err();
    assert_eq!(no_setup.exit_code(), 2);
}

#[test]
fn manifest_hashes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = commands::synth(&SynthOptions::default(), &tiny_config(), &dir.path().join("raw")).unwrap();
    let text = fs::read_to_string(dir.path().join("raw").join(MANIFEST_FILE)).unwrap();
    let manifest: RunManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(manifest.command, "synth");
    assert_eq!(manifest.outputs.len(), out.outputs.len());
    for a in &manifest.outputs {
        assert_eq!(a.sha256, commands::sha256_file(&a.path).unwrap());
    }
}

#[test]
fn train_then_interpret_then_echo() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let config = tiny_config();
    commands::synth(&SynthOptions::default(), &config, &root.join("raw")).unwrap();
    commands::preprocess(&root.join("raw"), &root.join("data"), &config).unwrap();
    commands::train(&root.join("data"), Some(Setup::De), &config, None, &root.join("de")).unwrap();
    let interp = commands::interpret(
        &root.join("data"),
        &root.join("de/model.ckpt"),
        &lexicon(),
        &config,
        &root.join("i"),
    )
    .unwrap();
    assert!(interp.outputs.iter().any(|p| p.ends_with("categories.csv")));
    let csv = fs::read_to_string(root.join("i/categories.csv")).unwrap();
    assert!(csv.starts_with("category,class,score"));

    commands::fixture(&EchoFixtureOptions::default(), &config, &root.join("fx")).unwrap();
    commands::echo(
        &root.join("fx"),
        VectorSource::File(&root.join("fx/vectors.json")),
        &config,
        &root.join("echo"),
    )
    .unwrap();
    let assessment = fs::read_to_string(root.join("echo/assessment.json")).unwrap();
    assert!(assessment.contains("\"ECE detected\": true"), "{assessment}");
}

fn row(dataset: &str, setup: Setup, seed: u64, f: f64) -> ResultRow {
    let m = Metrics {
        precision: f,
        recall: f,
        f1: f,
        ..Metrics::from_counts(0, 0, 0, 0)
    };
    ResultRow::new(dataset, setup, seed, 10, 0.0, 1, &m)
}

#[test]
fn report_collects_runs_into_one_row_per_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    fs::write(
        &a,
        results_to_csv(&[row("PF", Setup::News, 0, 0.5), row("PF", Setup::News, 1, 0.7)]).unwrap(),
    )
    .unwrap();
    fs::write(&b, results_to_csv(&[row("GC", Setup::Tl, 0, 0.4)]).unwrap()).unwrap();
    commands::report(&[a, b], &tiny_config(), &dir.path().join("r")).unwrap();
    let rows = read_results(&dir.path().join("r/results.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    let table = fs::read_to_string(dir.path().join("r/table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "dataset,News,TL,DE,TL+DE,N+TL,N+DE,N+TL+DE");
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().any(|l| l.starts_with("PF,0.600,")));

    let missing = commands::report(&[dir.path().join("nope.csv")], &tiny_config(), &dir.path().join("r2")).unwrap_err();
    assert_eq!(missing.exit_code(), 3);
}
