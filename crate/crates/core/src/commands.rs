//! The pipeline steps behind each `langspread` subcommand. Each step reads
//! its inputs from files, writes its outputs into one directory, and records
//! a `manifest.json` with content hashes and timings. Data outputs depend
//! only on the inputs, the config and the seed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::corpus::{EncodedUser, Label, ProcessedDataset, SplitPart, USERS_FILE, VOCAB_FILE};
use crate::echograph::{build_graph, ece_assess, ece_curve, topic_vector};
use crate::error::{Error, Result};
use crate::harness::{
    default_grid, frequency_random_baseline, grid_search, multi_seed_eval, read_results, results_table, results_to_csv,
    run_config, ExperimentData, ResultRow,
};
use crate::interpret::{attribute, CategoryLexicon, InterpretReport, Modality};
use crate::model::{build_instances, read_checkpoint, user_document, write_checkpoint, EncodedInstance, Setup};
use crate::nn::{load_embeddings, Matrix};
use crate::synth::{planted_echo_fixture, synthetic_corpus, EchoFixtureOptions, SynthOptions};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const RESULTS_FILE: &str = "results.csv";
pub const RUN_FILE: &str = "run.json";
pub const GRID_FILE: &str = "grid.json";
pub const GRID_CSV_FILE: &str = "grid.csv";
pub const BEST_CONFIG_FILE: &str = "best.toml";
pub const EVAL_FILE: &str = "eval.json";
pub const CATEGORIES_FILE: &str = "categories.csv";
pub const INTERPRET_FILE: &str = "interpret.json";
pub const VECTORS_FILE: &str = "vectors.json";
pub const GRAPH_FILE: &str = "graph.tsv";
pub const CURVE_FILE: &str = "curve.csv";
pub const ASSESSMENT_FILE: &str = "assessment.json";
pub const TABLE_FILE: &str = "table.csv";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub started_unix_ms: u128,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Config,
    pub seeds: Vec<u64>,
    pub inputs: Vec<Artifact>,
    pub outputs: Vec<Artifact>,
    pub timings: Timings,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn artifacts(paths: &[PathBuf]) -> Result<Vec<Artifact>> {
    paths
        .iter()
        .filter(|p| p.is_file())
        .map(|p| {
            Ok(Artifact {
                path: p.clone(),
                sha256: sha256_file(p)?,
            })
        })
        .collect()
}

/// Writes through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Collects outputs of one command and finishes with its manifest.
struct Run {
    command: &'static str,
    out: PathBuf,
    started: SystemTime,
    clock: Instant,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Run {
    fn start(command: &'static str, out: &Path) -> Result<Self> {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        Ok(Self {
            command,
            out: out.to_path_buf(),
            started: SystemTime::now(),
            clock: Instant::now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.outputs.push(path.clone());
        Ok(path)
    }

    fn finish(self, config: &Config, seeds: Vec<u64>) -> Result<CommandOutput> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            config: config.clone(),
            seeds,
            inputs: artifacts(&self.inputs)?,
            outputs: artifacts(&self.outputs)?,
            timings: Timings {
                started_unix_ms: self
                    .started
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_millis())
                    .unwrap_or(0),
                elapsed_ms: self.clock.elapsed().as_millis(),
            },
        };
        let path = self.out.join(MANIFEST_FILE);
        write_atomic(&path, (serde_json::to_string_pretty(&manifest)? + "\n").as_bytes())?;
        Ok(CommandOutput {
            outputs: self.outputs,
            manifest,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub outputs: Vec<PathBuf>,
    pub manifest: RunManifest,
}

fn require(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::MissingArtifact(path.to_path_buf()))
    }
}

fn resolve_setup(setup: Option<Setup>, config: &Config) -> Result<Setup> {
    setup
        .or(config.setup)
        .ok_or_else(|| Error::Config("no setup given; pass --setup or set `setup` in the config".into()))
}

fn dataset_inputs(run: &mut Run, data: &Path) {
    for name in crate::corpus::dataset_files() {
        run.input(&data.join(name));
    }
}

/// Raw `news.jsonl` and `users.jsonl` to a processed dataset directory.
pub fn preprocess(raw: &Path, out: &Path, config: &Config) -> Result<CommandOutput> {
    let ds = ProcessedDataset::from_raw_dir(raw, &config.preprocess_options())?;
    let mut run = Run::start("preprocess", out)?;
    run.input(&raw.join(crate::corpus::NEWS_FILE));
    run.input(&raw.join(USERS_FILE));
    for (name, body) in ds.render()? {
        run.write(name, body)?;
    }
    run.finish(config, vec![config.seed])
}

struct Splits {
    train: Vec<EncodedInstance>,
    val: Vec<EncodedInstance>,
    test: Vec<EncodedInstance>,
}

fn load_splits(ds: &ProcessedDataset, setup: Setup) -> Splits {
    Splits {
        train: build_instances(ds, setup, SplitPart::Train),
        val: build_instances(ds, setup, SplitPart::Val),
        test: build_instances(ds, setup, SplitPart::Test),
    }
}

fn embeddings_for(
    run: &mut Run,
    path: Option<&Path>,
    ds: &ProcessedDataset,
    config: &Config,
) -> Result<Option<Matrix>> {
    path.map(|p| {
        run.input(p);
        load_embeddings(p, &ds.vocab, config.embedding_dim, config.seed)
    })
    .transpose()
}

/// Trains one model and writes its checkpoint, result row and run record.
pub fn train(
    data: &Path,
    setup: Option<Setup>,
    config: &Config,
    embeddings: Option<&Path>,
    out: &Path,
) -> Result<CommandOutput> {
    let setup = resolve_setup(setup, config)?;
    let ds = ProcessedDataset::load(data)?;
    let mut run = Run::start("train", out)?;
    dataset_inputs(&mut run, data);
    let table = embeddings_for(&mut run, embeddings, &ds, config)?;
    let splits = load_splits(&ds, setup);
    let exp = ExperimentData {
        train: &splits.train,
        val: &splits.val,
        test: &splits.test,
        embeddings: table.as_ref(),
    };
    let model_cfg = config.model_config(setup, &ds.vocab);
    let (model, result) = run_config(exp, &model_cfg, &config.train_config())?;
    let ckpt = out.join(CHECKPOINT_FILE);
    write_checkpoint(&model, &ckpt)?;
    run.outputs.push(ckpt);
    let test = result.test.unwrap_or_default();
    let row = ResultRow::new(
        &config.dataset,
        setup,
        config.seed,
        config.num_filters,
        config.dropout,
        result.best_epoch,
        &test,
    );
    run.write(RESULTS_FILE, results_to_csv(&[row])?)?;
    run.write(RUN_FILE, serde_json::to_string_pretty(&result)? + "\n")?;
    run.finish(config, vec![config.seed])
}

/// Grid search over filter counts and dropout rates on the validation set.
pub fn grid(
    data: &Path,
    setup: Option<Setup>,
    config: &Config,
    embeddings: Option<&Path>,
    out: &Path,
) -> Result<CommandOutput> {
    let setup = resolve_setup(setup, config)?;
    let ds = ProcessedDataset::load(data)?;
    let mut run = Run::start("grid", out)?;
    dataset_inputs(&mut run, data);
    let table = embeddings_for(&mut run, embeddings, &ds, config)?;
    let splits = load_splits(&ds, setup);
    let exp = ExperimentData {
        train: &splits.train,
        val: &splits.val,
        test: &splits.test,
        embeddings: table.as_ref(),
    };
    let result = grid_search(
        exp,
        &config.model_config(setup, &ds.vocab),
        &config.train_config(),
        &default_grid(),
    )?;
    let mut csv = String::from("num_filters,dropout,best_epoch,val_f1,test_f1\n");
    for c in &result.cells {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            c.cell.num_filters,
            c.cell.dropout,
            c.run.best_epoch,
            c.run.best_val_f(),
            c.run.test.unwrap_or_default().f1
        ));
    }
    run.write(GRID_CSV_FILE, csv)?;
    run.write(GRID_FILE, serde_json::to_string_pretty(&result)? + "\n")?;
    let best = result.best_cell().cell;
    let best_config = Config {
        setup: Some(setup),
        num_filters: best.num_filters,
        dropout: best.dropout,
        ..config.clone()
    };
    run.write(BEST_CONFIG_FILE, best_config.to_toml())?;
    run.finish(config, vec![config.seed])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub dataset: String,
    pub setup: Setup,
    pub seeds: Vec<u64>,
    pub mean_f1: f64,
    pub std_f1: f64,
    pub baseline_f1: f64,
    pub baseline_trials: usize,
}

/// Multi-seed test evaluation of one configuration plus the frequency
/// baseline on the same test split.
pub fn eval(
    data: &Path,
    setup: Option<Setup>,
    config: &Config,
    embeddings: Option<&Path>,
    out: &Path,
) -> Result<CommandOutput> {
    let setup = resolve_setup(setup, config)?;
    let ds = ProcessedDataset::load(data)?;
    let mut run = Run::start("eval", out)?;
    dataset_inputs(&mut run, data);
    let table = embeddings_for(&mut run, embeddings, &ds, config)?;
    let splits = load_splits(&ds, setup);
    let exp = ExperimentData {
        train: &splits.train,
        val: &splits.val,
        test: &splits.test,
        embeddings: table.as_ref(),
    };
    let result = multi_seed_eval(
        exp,
        &config.model_config(setup, &ds.vocab),
        &config.train_config(),
        config.seeds,
        config.seed,
    )?;
    let rows: Vec<ResultRow> = result
        .runs
        .iter()
        .map(|r| {
            ResultRow::new(
                &config.dataset,
                setup,
                r.seed,
                config.num_filters,
                config.dropout,
                r.run.best_epoch,
                &r.run.test.unwrap_or_default(),
            )
        })
        .collect();
    let labels = |xs: &[EncodedInstance]| -> Vec<Label> { xs.iter().map(|i| i.label).collect() };
    let baseline_f1 = frequency_random_baseline(
        &labels(&splits.train),
        &labels(&splits.test),
        config.baseline_trials,
        config.seed,
    )?;
    let seeds: Vec<u64> = result.runs.iter().map(|r| r.seed).collect();
    let summary = EvalSummary {
        dataset: config.dataset.clone(),
        setup,
        seeds: seeds.clone(),
        mean_f1: result.mean_f,
        std_f1: result.std_f,
        baseline_f1,
        baseline_trials: config.baseline_trials,
    };
    run.write(RESULTS_FILE, results_to_csv(&rows)?)?;
    run.write(EVAL_FILE, serde_json::to_string_pretty(&summary)? + "\n")?;
    run.finish(config, seeds)
}

/// Attribution and category report for a trained single-modality model.
pub fn interpret(data: &Path, model_path: &Path, lexicon: &Path, config: &Config, out: &Path) -> Result<CommandOutput> {
    let model = read_checkpoint(model_path)?;
    let ds = ProcessedDataset::load(data)?;
    let lex = CategoryLexicon::load(lexicon)?;
    let mut run = Run::start("interpret", out)?;
    dataset_inputs(&mut run, data);
    run.input(model_path);
    run.input(lexicon);
    let setup = model.setup();
    let modality = Modality::primary(&model);
    let instances = build_instances(&ds, setup, config.split_part()?);
    let docs = modality.documents(&instances);
    let attribution = attribute(&model, modality, &docs)?;
    let report = InterpretReport::build(
        setup.name(),
        modality,
        docs.len(),
        &attribution.scored,
        &attribution.salient,
        &ds.vocab,
        &lex,
    );
    run.write(CATEGORIES_FILE, report.to_csv())?;
    run.write(INTERPRET_FILE, serde_json::to_string_pretty(&report)? + "\n")?;
    run.finish(config, vec![model.config.seed])
}

fn read_users(path: &Path) -> Result<Vec<EncodedUser>> {
    require(path)?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Where topic vectors for the echo-chamber analysis come from.
#[derive(Debug, Clone, Copy)]
pub enum VectorSource<'a> {
    /// A JSON object mapping user id to vector.
    File(&'a Path),
    /// Computed from each user's text with a trained TL or DE model.
    Model { model: &'a Path, lexicon: &'a Path },
}

/// Retweet graph, similarity-by-distance curve and its assessment. `data`
/// must hold a `users.jsonl`; computing vectors from a model also needs the
/// dataset vocabulary.
pub fn echo(data: &Path, vectors: VectorSource<'_>, config: &Config, out: &Path) -> Result<CommandOutput> {
    let users_path = data.join(USERS_FILE);
    let users = read_users(&users_path)?;
    let computed = matches!(vectors, VectorSource::Model { .. });
    let (vectors, mut inputs, seeds): (BTreeMap<String, Vec<f64>>, Vec<PathBuf>, Vec<u64>) = match vectors {
        VectorSource::File(path) => {
            require(path)?;
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            (
                serde_json::from_str(&text)?,
                vec![path.to_path_buf()],
                vec![config.seed],
            )
        }
        VectorSource::Model { model, lexicon } => {
            let m = read_checkpoint(model)?;
            let vocab_path = data.join(VOCAB_FILE);
            require(&vocab_path)?;
            let vocab_text = fs::read_to_string(&vocab_path).map_err(|e| Error::io(&vocab_path, e))?;
            let vocab = crate::corpus::Vocabulary::from_tsv(&vocab_text, 0)?;
            let lex = CategoryLexicon::load(lexicon)?;
            let text = m
                .setup()
                .user_text()
                .ok_or_else(|| Error::Config("topic vectors need a model with a user module".into()))?;
            let sep = vocab.id(crate::corpus::text::SEP).unwrap_or(crate::corpus::PAD_ID);
            let vectors = users
                .iter()
                .map(|u| {
                    let doc = user_document(u, text, sep);
                    (u.id.clone(), topic_vector(&m, Modality::Users, &doc, &vocab, &lex))
                })
                .collect();
            (
                vectors,
                vec![model.to_path_buf(), lexicon.to_path_buf(), vocab_path],
                vec![m.config.seed],
            )
        }
    };
    inputs.push(users_path);
    let graph = build_graph(&users, config.external_threshold);
    let curve = ece_curve(&graph, &vectors, &config.ece_options())?;
    let assessment = ece_assess(&curve)?;
    let mut run = Run::start("echo", out)?;
    for p in &inputs {
        run.input(p);
    }
    if computed {
        run.write(VECTORS_FILE, serde_json::to_string(&vectors)? + "\n")?;
    }
    run.write(GRAPH_FILE, graph.edge_list())?;
    run.write(CURVE_FILE, curve.to_csv())?;
    run.write(ASSESSMENT_FILE, serde_json::to_string_pretty(&assessment)? + "\n")?;
    run.finish(config, seeds)
}

/// Merges result CSVs into one file and the per-dataset setup table.
pub fn report(inputs: &[PathBuf], config: &Config, out: &Path) -> Result<CommandOutput> {
    if inputs.is_empty() {
        return Err(Error::InvalidArgument("report needs at least one results file".into()));
    }
    let mut rows = Vec::new();
    for p in inputs {
        rows.extend(read_results(p)?);
    }
    let mut run = Run::start("report", out)?;
    for p in inputs {
        run.input(p);
    }
    run.write(RESULTS_FILE, results_to_csv(&rows)?)?;
    run.write(TABLE_FILE, results_table(&rows))?;
    let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    run.finish(config, seeds)
}

/// Writes a raw synthetic corpus ready for [`preprocess`].
pub fn synth(opts: &SynthOptions, config: &Config, out: &Path) -> Result<CommandOutput> {
    let corpus = synthetic_corpus(opts);
    let mut run = Run::start("synth", out)?;
    run.write(crate::corpus::NEWS_FILE, &corpus.news_jsonl)?;
    run.write(USERS_FILE, &corpus.users_jsonl)?;
    run.finish(config, vec![opts.seed])
}

/// Writes the planted echo-chamber fixture: `users.jsonl` with retweets and
/// `vectors.json`, ready for [`echo`].
pub fn fixture(opts: &EchoFixtureOptions, config: &Config, out: &Path) -> Result<CommandOutput> {
    let f = planted_echo_fixture(opts);
    let mut run = Run::start("fixture", out)?;
    run.write(USERS_FILE, f.users_jsonl()?)?;
    run.write(VECTORS_FILE, f.vectors_json()?)?;
    run.finish(config, vec![opts.seed])
}
