use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use langspread::commands::{self, CommandOutput, VectorSource};
use langspread::config::Config;
use langspread::error::EXIT_INPUT;
use langspread::model::Setup;
use langspread::synth::{EchoFixtureOptions, SynthOptions};
use langspread::Error;

/// Fake news detection from news text and spreader language.
#[derive(Debug, Parser)]
#[command(name = "langspread", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ModelRun {
    /// Processed dataset directory.
    #[arg(long)]
    data: PathBuf,
    /// One of News, TL, DE, TL+DE, N+TL, N+DE, N+TL+DE.
    #[arg(long)]
    setup: Option<String>,
    /// Pretrained embeddings in whitespace-separated text format.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tokenize, filter, split and encode raw news and user records.
    Preprocess {
        /// Directory holding news.jsonl and users.jsonl.
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train one model with early stopping.
    Train(ModelRun),
    /// Grid search over filter count and dropout.
    Grid(ModelRun),
    /// Multi-seed test evaluation and the frequency baseline.
    Eval(ModelRun),
    /// Relevant n-grams and category importance of a trained model.
    Interpret {
        #[arg(long)]
        data: PathBuf,
        /// Checkpoint written by `train`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Echo-chamber analysis over the retweet graph.
    Echo {
        /// Directory holding users.jsonl (and vocab.tsv with --model).
        #[arg(long)]
        data: PathBuf,
        /// Precomputed topic vectors (JSON object of user id to vector).
        #[arg(long, conflicts_with_all = ["model", "lexicon"])]
        vectors: Option<PathBuf>,
        /// TL or DE checkpoint used to compute topic vectors.
        #[arg(long, requires = "lexicon")]
        model: Option<PathBuf>,
        #[arg(long, requires = "model")]
        lexicon: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Merge results files into one table.
    Report {
        /// results.csv files to merge.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Write a synthetic raw corpus.
    Synth {
        #[arg(long, default_value_t = 40)]
        news: usize,
        #[arg(long, default_value_t = 3)]
        users_per_news: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Write the planted echo-chamber fixture.
    Fixture {
        /// Permute topic vectors across users.
        #[arg(long)]
        shuffled: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> Result<Config, Error> {
    let mut config = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn parse_setup(name: Option<&str>) -> Result<Option<Setup>, Error> {
    name.map(str::parse).transpose()
}

fn run(command: Command) -> Result<CommandOutput, Error> {
    match command {
        Command::Preprocess { data, common } => commands::preprocess(&data, &common.out, &load_config(&common)?),
        Command::Train(r) => {
            let setup = parse_setup(r.setup.as_deref())?;
            commands::train(
                &r.data,
                setup,
                &load_config(&r.common)?,
                r.embeddings.as_deref(),
                &r.common.out,
            )
        }
        Command::Grid(r) => {
            let setup = parse_setup(r.setup.as_deref())?;
            commands::grid(
                &r.data,
                setup,
                &load_config(&r.common)?,
                r.embeddings.as_deref(),
                &r.common.out,
            )
        }
        Command::Eval(r) => {
            let setup = parse_setup(r.setup.as_deref())?;
            commands::eval(
                &r.data,
                setup,
                &load_config(&r.common)?,
                r.embeddings.as_deref(),
                &r.common.out,
            )
        }
        Command::Interpret {
            data,
            model,
            lexicon,
            common,
        } => commands::interpret(&data, &model, &lexicon, &load_config(&common)?, &common.out),
        Command::Echo {
            data,
            vectors,
            model,
            lexicon,
            common,
        } => {
            let source = match (&vectors, &model, &lexicon) {
                (Some(v), _, _) => VectorSource::File(v),
                (None, Some(model), Some(lexicon)) => VectorSource::Model { model, lexicon },
                _ => {
                    return Err(Error::InvalidArgument(
                        "echo needs --vectors or both --model and --lexicon".into(),
                    ))
                }
            };
            commands::echo(&data, source, &load_config(&common)?, &common.out)
        }
        Command::Report { inputs, common } => commands::report(&inputs, &load_config(&common)?, &common.out),
        Command::Synth {
            news,
            users_per_news,
            common,
        } => {
            let config = load_config(&common)?;
            let opts = SynthOptions {
                news,
                users_per_news,
                seed: config.seed,
                ..SynthOptions::default()
            };
            commands::synth(&opts, &config, &common.out)
        }
        Command::Fixture { shuffled, common } => {
            let config = load_config(&common)?;
            let opts = EchoFixtureOptions {
                shuffled,
                seed: config.seed,
                ..EchoFixtureOptions::default()
            };
            commands::fixture(&opts, &config, &common.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(out) => {
            for path in &out.outputs {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
