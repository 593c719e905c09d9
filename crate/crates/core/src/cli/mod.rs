//! The `sentimix` command line.
//!
//! ```text
//! sentimix preprocess --corpus tweets.txt --out clean.tsv
//! sentimix train      --corpus train.txt --model model.txt [--c 10 --kernel rbf ...]
//! sentimix tune       --corpus train.txt --grid-config grid.toml --out cv.tsv --model best.txt
//! sentimix predict    --corpus test.txt --model model.txt --out predictions.tsv
//! sentimix evaluate   --corpus gold.txt --predictions predictions.tsv [--out report.json]
//! ```
//!
//! Exit status is 0 on success, 1 for usage or configuration errors, 2 for
//! bad input data and 3 for internal failures.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_evaluate, cmd_predict, cmd_preprocess, cmd_train, cmd_tune, read_predictions, TrainSummary,
};
pub use config::RunConfig;

use crate::svr::KernelKind;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "sentimix", version, about = "Sentiment classification for code-mixed English-Hindi tweets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write each tweet's cleaned words as `uid<TAB>words`.
    Preprocess(CommonArgs),
    /// Fit features and an SVR with fixed hyperparameters.
    Train(TrainArgs),
    /// Grid-search SVR hyperparameters and refit the best combination.
    Tune(TuneArgs),
    /// Label a corpus with a saved model.
    Predict(CommonArgs),
    /// Score predictions against a labeled corpus.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Run configuration file (TOML); flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Word vectors, one `word v1 v2 ...` per line.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Directory holding humor.tsv, hate.tsv, offense.tsv and sentiment.tsv.
    #[arg(long)]
    pub lexicon_dir: Option<PathBuf>,
    #[arg(long)]
    pub easy_words: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "c")]
    pub c: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub kernel: Option<KernelKind>,
    /// Hold out this share of the corpus and report its macro F1.
    #[arg(long)]
    pub validation_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Grid definition (TOML): value lists, folds, seed, workers.
    #[arg(long)]
    pub grid_config: Option<PathBuf>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// `uid<TAB>label` lines as written by `predict`.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
}

impl CommonArgs {
    /// The config file (if any) with these flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let set = |slot: &mut Option<PathBuf>, flag: &Option<PathBuf>| {
            if flag.is_some() {
                slot.clone_from(flag);
            }
        };
        set(&mut cfg.corpus, &self.corpus);
        set(&mut cfg.embeddings, &self.embeddings);
        set(&mut cfg.lexicon_dir, &self.lexicon_dir);
        set(&mut cfg.easy_words, &self.easy_words);
        set(&mut cfg.model, &self.model);
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

fn parse(args: impl IntoIterator<Item = OsString>) -> std::result::Result<Cli, clap::Error> {
    Cli::try_parse_from(args)
}

/// Runs one command and returns the process exit status. Errors are
/// reported on stderr.
pub fn run(args: impl IntoIterator<Item = OsString>) -> i32 {
    let cli = match parse(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Preprocess(args) => {
            let cfg = args.resolve()?;
            cmd_preprocess(&cfg, args.out.as_deref())
        }
        Command::Train(args) => {
            let mut cfg = args.common.resolve()?;
            cfg.svr.c = args.c.unwrap_or(cfg.svr.c);
            cfg.svr.epsilon = args.epsilon.unwrap_or(cfg.svr.epsilon);
            cfg.svr.gamma = args.gamma.unwrap_or(cfg.svr.gamma);
            cfg.svr.kernel = args.kernel.unwrap_or(cfg.svr.kernel);
            if args.validation_fraction.is_some() {
                cfg.validation_fraction = args.validation_fraction;
            }
            if args.common.out.is_some() {
                cfg.model.clone_from(&args.common.out);
            }
            let summary = cmd_train(&cfg)?;
            print!("{summary}");
            Ok(())
        }
        Command::Tune(args) => {
            let mut cfg = args.common.resolve()?;
            if let Some(path) = &args.grid_config {
                let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                let grid = crate::tuning::GridConfig::from_toml_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                cfg.grid = grid.grid;
                cfg.folds = grid.folds;
                cfg.seed = grid.seed;
                if grid.workers.is_some() {
                    cfg.workers = grid.workers;
                }
            }
            if let Some(seed) = args.common.seed {
                cfg.seed = seed;
            }
            if let Some(k) = args.folds {
                cfg.folds = k;
            }
            if args.workers.is_some() {
                cfg.workers = args.workers;
            }
            if args.common.out.is_some() {
                cfg.report.clone_from(&args.common.out);
            }
            let table = cmd_tune(&cfg)?;
            print!("{table}");
            Ok(())
        }
        Command::Predict(args) => {
            let mut cfg = args.resolve()?;
            if args.out.is_some() {
                cfg.predictions.clone_from(&args.out);
            }
            cmd_predict(&cfg)
        }
        Command::Evaluate(args) => {
            let mut cfg = args.common.resolve()?;
            if args.predictions.is_some() {
                cfg.predictions.clone_from(&args.predictions);
            }
            if args.common.out.is_some() {
                cfg.report.clone_from(&args.common.out);
            }
            let table = cmd_evaluate(&cfg)?;
            print!("{table}");
            Ok(())
        }
    }
}
