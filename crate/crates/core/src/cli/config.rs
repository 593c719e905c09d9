use std::path::{Path, PathBuf};

use crate::features::DEFAULT_DIFFICULT_SYLLABLES;
use crate::svr::SvrHyperParams;
use crate::tuning::{reject_unknown, take_field, GridConfig, ParamGrid, DEFAULT_FOLDS};
use crate::{Error, Result};

/// Settings for a run, read from a TOML file and then overridden by
/// command-line flags. Relative paths in the file are resolved against the
/// file's directory.
///
/// ```toml
/// corpus = "train.txt"
/// embeddings = "vectors.txt"
/// lexicon_dir = "lexicons"
/// easy_words = "easy.txt"
/// model = "out/model.txt"
/// report = "out/cv.tsv"
/// folds = 3
/// seed = 7
/// workers = 4
/// validation_fraction = 0.1
/// syllable_threshold = 3
///
/// [svr]
/// c = 1.0
/// epsilon = 0.1
/// gamma = 0.1
/// kernel = "rbf"
///
/// [grid]
/// c_values = [1.0, 10.0]
/// kernels = ["rbf"]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub lexicon_dir: Option<PathBuf>,
    pub easy_words: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub svr: SvrHyperParams,
    pub grid: ParamGrid,
    pub folds: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub validation_fraction: Option<f64>,
    pub syllable_threshold: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            embeddings: None,
            lexicon_dir: None,
            easy_words: None,
            model: None,
            report: None,
            predictions: None,
            svr: SvrHyperParams::default(),
            grid: ParamGrid::default(),
            folds: DEFAULT_FOLDS,
            seed: 0,
            workers: None,
            validation_fraction: None,
            syllable_threshold: DEFAULT_DIFFICULT_SYLLABLES,
        }
    }
}

fn config_err(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{}: {msg}", path.display()))
}

fn take_table(table: &mut toml::Table, key: &str) -> std::result::Result<Option<toml::Table>, String> {
    take_field(table, key)
}

fn take_svr(table: &mut toml::Table) -> std::result::Result<SvrHyperParams, String> {
    let d = SvrHyperParams::default();
    let p = SvrHyperParams {
        c: take_field(table, "c")?.unwrap_or(d.c),
        epsilon: take_field(table, "epsilon")?.unwrap_or(d.epsilon),
        gamma: take_field(table, "gamma")?.unwrap_or(d.gamma),
        kernel: take_field(table, "kernel")?.unwrap_or(d.kernel),
        tol: take_field(table, "tol")?.unwrap_or(d.tol),
        cache_size_mb: take_field(table, "cache_size_mb")?.unwrap_or(d.cache_size_mb),
        coef0: take_field(table, "coef0")?.unwrap_or(d.coef0),
        max_iter: take_field(table, "max_iter")?.unwrap_or(d.max_iter),
        shrinking: take_field(table, "shrinking")?.unwrap_or(d.shrinking),
    };
    reject_unknown(table).map_err(|e| format!("[svr] {e}"))?;
    p.validate().map_err(|e| format!("[svr] {e}"))?;
    Ok(p)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_toml_str(&text, base).map_err(|e| config_err(path, e))
    }

    pub fn from_toml_str(text: &str, base: &Path) -> std::result::Result<Self, String> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
        let d = Self::default();
        let mut path = |key: &str| -> std::result::Result<Option<PathBuf>, String> {
            Ok(take_field::<PathBuf>(&mut table, key)?.map(|p| base.join(p)))
        };
        let (corpus, embeddings, lexicon_dir, easy_words, model, report, predictions) = (
            path("corpus")?,
            path("embeddings")?,
            path("lexicon_dir")?,
            path("easy_words")?,
            path("model")?,
            path("report")?,
            path("predictions")?,
        );
        let svr = match take_table(&mut table, "svr")? {
            Some(mut t) => take_svr(&mut t)?,
            None => d.svr,
        };
        let grid = match take_table(&mut table, "grid")? {
            Some(mut t) => {
                let g = GridConfig::take_from(&mut t).map_err(|e| format!("[grid] {e}"))?;
                reject_unknown(&t).map_err(|e| format!("[grid] {e}"))?;
                g.grid
            }
            None => d.grid,
        };
        let cfg = Self {
            corpus,
            embeddings,
            lexicon_dir,
            easy_words,
            model,
            report,
            predictions,
            svr,
            grid,
            folds: take_field(&mut table, "folds")?.unwrap_or(d.folds),
            seed: take_field(&mut table, "seed")?.unwrap_or(d.seed),
            workers: take_field(&mut table, "workers")?,
            validation_fraction: take_field(&mut table, "validation_fraction")?,
            syllable_threshold: take_field(&mut table, "syllable_threshold")?.unwrap_or(d.syllable_threshold),
        };
        reject_unknown(&table)?;
        if cfg.folds < 2 {
            return Err(format!("field `folds`: must be at least 2, got {}", cfg.folds));
        }
        if cfg.workers == Some(0) {
            return Err("field `workers`: must be at least 1".into());
        }
        Ok(cfg)
    }
}
