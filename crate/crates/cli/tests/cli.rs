use std::ffi::OsStr;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn langspread<S: AsRef<OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_langspread"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn arg(p: impl AsRef<Path>) -> String {
    p.as_ref().to_str().unwrap().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    fs::write(
        &path,
        "min_count = 1\nembedding_dim = 8\nmax_epochs = 3\nseeds = 2\nbaseline_trials = 100\n",
    )
    .unwrap();
    path
}

#[test]
fn full_pipeline_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config = write_config(d);
    let lexicon = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/lexicon/demo_lexicon.json");
    let steps: Vec<Vec<String>> = vec![
        vec!["synth".into(), "--out".into(), arg(d.join("raw"))],
        vec![
            "preprocess".into(),
            "--data".into(),
            arg(d.join("raw")),
            "--config".into(),
            arg(&config),
            "--out".into(),
            arg(d.join("data")),
        ],
        vec![
            "train".into(),
            "--data".into(),
            arg(d.join("data")),
            "--setup".into(),
            "N+TL".into(),
            "--config".into(),
            arg(&config),
            "--out".into(),
            arg(d.join("train")),
        ],
        vec![
            "eval".into(),
            "--data".into(),
            arg(d.join("data")),
            "--setup".into(),
            "TL".into(),
            "--config".into(),
            arg(&config),
            "--out".into(),
            arg(d.join("eval")),
        ],
        vec![
            "interpret".into(),
            "--data".into(),
            arg(d.join("data")),
            "--model".into(),
            arg(d.join("train/model.ckpt")),
            "--lexicon".into(),
            arg(&lexicon),
            "--config".into(),
            arg(&config),
            "--out".into(),
            arg(d.join("interpret")),
        ],
        vec![
            "report".into(),
            arg(d.join("eval/results.csv")),
            "--out".into(),
            arg(d.join("report")),
        ],
    ];
    for step in steps {
        let o = langspread(&step);
        assert_eq!(code(&o), 0, "{step:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(d.join("report/table.csv").exists());
    assert!(d.join("interpret/categories.csv").exists());
}

#[test]
fn planted_fixture_is_detected_and_shuffled_is_not() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (name, extra, expected) in [("planted", None, true), ("shuffled", Some("--shuffled"), false)] {
        let fx = d.join(name);
        let mut args = vec!["fixture".to_string(), "--out".into(), arg(&fx)];
        args.extend(extra.map(String::from));
        assert_eq!(code(&langspread(&args)), 0);
        let out = d.join(format!("{name}-echo"));
        let o = langspread(&[
            "echo",
            "--data",
            &arg(&fx),
            "--vectors",
            &arg(fx.join("vectors.json")),
            "--out",
            &arg(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let assessment: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("assessment.json")).unwrap()).unwrap();
        assert_eq!(assessment["ECE detected"], serde_json::Value::Bool(expected), "{name}");
    }
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = langspread(&[
        "preprocess",
        "--data",
        &arg(d.join("absent")),
        "--out",
        &arg(d.join("x")),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    assert_eq!(code(&langspread(&["frobnicate"])), 2);

    langspread(&["synth", "--out", &arg(d.join("raw"))]);
    let config = write_config(d);
    langspread(&[
        "preprocess",
        "--data",
        &arg(d.join("raw")),
        "--config",
        &arg(&config),
        "--out",
        &arg(d.join("data")),
    ]);
    let o = langspread(&[
        "train",
        "--data",
        &arg(d.join("data")),
        "--setup",
        "NEWS+TL",
        "--out",
        &arg(d.join("t")),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("N+TL+DE"));

    fs::write(d.join("bad.toml"), "no_such_key = 1\n").unwrap();
    let o = langspread(&[
        "synth",
        "--config",
        &arg(d.join("bad.toml")),
        "--out",
        &arg(d.join("s")),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_artifact_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = langspread(&[
        "train",
        "--data",
        &arg(d.join("nothing")),
        "--setup",
        "News",
        "--out",
        &arg(d.join("t")),
    ]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let o = langspread(&["report", &arg(d.join("missing.csv")), "--out", &arg(d.join("r"))]);
    assert_eq!(code(&o), 3);
}
