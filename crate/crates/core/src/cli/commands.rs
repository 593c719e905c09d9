use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use super::RunConfig;
use crate::corpus::{parse_corpus, split_corpus, CodeMixedInstance, SentimentLabel};
use crate::eval::{confusion, format_report, macro_f1, report};
use crate::features::{FeaturePipeline, FeatureResources, FeatureVector, ResourcePaths};
use crate::preprocess::{clean, CleanDocument};
use crate::svr::{decode_label, encode_label, load_model, save_model, write_atomic, SvrModel};
use crate::tuning::{expand_grid, grid_search, SearchOptions};
use crate::{Error, Result};

fn require<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::Usage(format!("missing --{flag} (or `{}` in the config file)", flag.replace('-', "_"))))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn resource_paths(cfg: &RunConfig) -> ResourcePaths {
    ResourcePaths {
        embeddings: cfg.embeddings.clone(),
        lexicon_dir: cfg.lexicon_dir.clone(),
        easy_words: cfg.easy_words.clone(),
    }
}

fn labeled(corpus: Vec<CodeMixedInstance>) -> Result<(Vec<CodeMixedInstance>, Vec<SentimentLabel>)> {
    let total = corpus.len();
    let kept: Vec<CodeMixedInstance> = corpus.into_iter().filter(|i| i.label.is_some()).collect();
    if kept.is_empty() {
        return Err(Error::Data("corpus has no labeled instances".into()));
    }
    if kept.len() < total {
        log::warn!("skipping {} unlabeled instances", total - kept.len());
    }
    let labels = kept.iter().map(|i| i.label.expect("filtered above")).collect();
    Ok((kept, labels))
}

/// Fits TF-IDF on `instances` and featurizes them.
fn fit_features(cfg: &RunConfig, instances: &[CodeMixedInstance]) -> Result<(FeaturePipeline, Vec<FeatureVector>)> {
    let resources = FeatureResources::load(&resource_paths(cfg), cfg.syllable_threshold)?;
    let docs: Vec<CleanDocument> = instances.iter().map(clean).collect();
    let pipeline = FeaturePipeline::fit(&docs, resources)?;
    let x = docs.iter().map(|d| pipeline.transform(d)).collect();
    Ok((pipeline, x))
}

fn predict_instances(
    model: &SvrModel<FeatureVector>,
    pipeline: &FeaturePipeline,
    instances: &[CodeMixedInstance],
) -> Result<Vec<SentimentLabel>> {
    instances
        .iter()
        .map(|inst| Ok(decode_label(model.predict(&pipeline.transform(&clean(inst)))?)?))
        .collect()
}

/// Writes `uid<TAB>cleaned words` per instance to `out`, or stdout.
pub fn cmd_preprocess(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let corpus = parse_corpus(require(&cfg.corpus, "corpus")?)?;
    let mut text = String::new();
    for inst in &corpus {
        let doc = clean(inst);
        text.push_str(&inst.uid);
        text.push('\t');
        text.push_str(&doc.words.join(" "));
        text.push('\n');
    }
    match out {
        Some(path) => write_file(path, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Internal(format!("writing to stdout: {e}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub model_path: PathBuf,
    pub instances: usize,
    pub vocabulary: usize,
    pub feature_dim: usize,
    pub support_vectors: usize,
    pub iterations: u64,
    pub converged: bool,
    pub validation: Option<(usize, f64)>,
}

impl fmt::Display for TrainSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model: {}", self.model_path.display())?;
        writeln!(f, "training instances: {}", self.instances)?;
        writeln!(f, "vocabulary: {}", self.vocabulary)?;
        writeln!(f, "feature dimension: {}", self.feature_dim)?;
        writeln!(f, "support vectors: {}", self.support_vectors)?;
        writeln!(f, "solver iterations: {}", self.iterations)?;
        writeln!(f, "converged: {}", self.converged)?;
        if let Some((n, score)) = self.validation {
            writeln!(f, "validation macro F1 ({n} instances): {score:.4}")?;
        }
        Ok(())
    }
}

/// Fits features and an SVR with the configured hyperparameters and saves
/// the model. With a validation fraction, that share of the labeled corpus
/// is held out and scored instead of trained on.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainSummary> {
    let corpus_path = require(&cfg.corpus, "corpus")?;
    let model_path = require(&cfg.model, "model")?;
    cfg.svr.validate()?;
    let (instances, _) = labeled(parse_corpus(corpus_path)?)?;
    let (train, held_out) = match cfg.validation_fraction {
        Some(f) => {
            let split = split_corpus(&instances, f, cfg.seed)?;
            (split.train, Some(split.validation))
        }
        None => (instances, None),
    };
    let labels: Vec<f64> = train.iter().map(|i| encode_label(i.label.expect("labeled"))).collect();
    let (pipeline, x) = fit_features(cfg, &train)?;
    let model = SvrModel::fit(&cfg.svr, &x, &labels)?;
    if !model.converged {
        log::warn!("solver hit its iteration cap before converging");
    }
    let validation = match held_out {
        Some(val) => {
            let gold: Vec<SentimentLabel> = val.iter().map(|i| i.label.expect("labeled")).collect();
            let pred = predict_instances(&model, &pipeline, &val)?;
            Some((val.len(), macro_f1(&gold, &pred)?))
        }
        None => None,
    };
    save_model(model_path, &model, &pipeline.state())?;
    Ok(TrainSummary {
        model_path: model_path.to_path_buf(),
        instances: train.len(),
        vocabulary: pipeline.tfidf().vocabulary_size(),
        feature_dim: pipeline.total_dim(),
        support_vectors: model.support_vectors.len(),
        iterations: model.n_iterations,
        converged: model.converged,
        validation,
    })
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Grid-searches the configured grid, writes the report (tab-separated text
/// plus a `.json` dump next to it) and the refit best model. Nothing is
/// written unless the whole search succeeds. Returns the text report.
pub fn cmd_tune(cfg: &RunConfig) -> Result<String> {
    let corpus_path = require(&cfg.corpus, "corpus")?;
    let report_path = require(&cfg.report, "out")?;
    let model_path = require(&cfg.model, "model")?;
    let combos = expand_grid(&cfg.grid, &cfg.svr)?;
    let (instances, labels) = labeled(parse_corpus(corpus_path)?)?;
    let (pipeline, x) = fit_features(cfg, &instances)?;
    let opts = SearchOptions {
        folds: cfg.folds,
        seed: cfg.seed,
        workers: cfg.workers.unwrap_or_else(default_workers),
    };
    let (report, model) = grid_search(&combos, &x, &labels, &opts)?;
    let table = report.to_table();
    let mut json_path = report_path.as_os_str().to_owned();
    json_path.push(".json");
    write_file(report_path, &table)?;
    write_file(Path::new(&json_path), &report.to_json())?;
    save_model(model_path, &model, &pipeline.state())?;
    Ok(table)
}

/// Labels every instance of the corpus, in file order, as `uid<TAB>label`.
pub fn cmd_predict(cfg: &RunConfig) -> Result<()> {
    let corpus_path = require(&cfg.corpus, "corpus")?;
    let model_path = require(&cfg.model, "model")?;
    let out = require(&cfg.predictions, "out")?;
    let (model, state) = load_model(model_path)?;
    let resources = FeatureResources::load(&resource_paths(cfg), state.syllable_threshold)?;
    let pipeline = FeaturePipeline::restore(state, resources)?;
    let corpus = parse_corpus(corpus_path)?;
    let labels = predict_instances(&model, &pipeline, &corpus)?;
    let mut text = String::new();
    for (inst, label) in corpus.iter().zip(labels) {
        text.push_str(&inst.uid);
        text.push('\t');
        text.push_str(label.as_str());
        text.push('\n');
    }
    write_file(out, &text)
}

/// Reads `uid<TAB>label` lines. Uids must be unique.
pub fn read_predictions(path: &Path) -> Result<Vec<(String, SentimentLabel)>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let bad = |reason: String| Error::Data(format!("{} line {}: {reason}", path.display(), i + 1));
        let (uid, label) = line.split_once('\t').ok_or_else(|| bad("expected `uid<TAB>label`".into()))?;
        let label: SentimentLabel = label.trim_end().parse().map_err(|e: String| bad(e))?;
        if !seen.insert(uid.to_string()) {
            return Err(bad(format!("duplicate uid `{uid}`")));
        }
        out.push((uid.to_string(), label));
    }
    Ok(out)
}

/// Joins predictions to the gold corpus on uid and scores them. Writes the
/// JSON report to the configured report path, if any, and returns the text
/// table.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<String> {
    let gold_path = require(&cfg.corpus, "corpus")?;
    let pred_path = require(&cfg.predictions, "predictions")?;
    let gold = parse_corpus(gold_path)?;
    let predictions: HashMap<String, SentimentLabel> = read_predictions(pred_path)?.into_iter().collect();

    let mut gold_labels = Vec::with_capacity(gold.len());
    let mut pred_labels = Vec::with_capacity(gold.len());
    for inst in &gold {
        let g = inst
            .label
            .ok_or_else(|| Error::Data(format!("gold instance `{}` has no label", inst.uid)))?;
        let p = predictions
            .get(&inst.uid)
            .ok_or_else(|| Error::Data(format!("no prediction for uid `{}`", inst.uid)))?;
        gold_labels.push(g);
        pred_labels.push(*p);
    }
    if predictions.len() != gold.len() {
        let known: HashSet<&str> = gold.iter().map(|i| i.uid.as_str()).collect();
        let mut extra: Vec<&String> = predictions.keys().filter(|u| !known.contains(u.as_str())).collect();
        extra.sort();
        return Err(Error::Data(format!("prediction for unknown uid `{}`", extra[0])));
    }
    let r = report(&confusion(&gold_labels, &pred_labels)?);
    if let Some(path) = &cfg.report {
        write_file(path, &r.to_json())?;
    }
    Ok(format_report(&r))
}
