//! Exhaustive grid search with k-fold cross-validation.
//!
//! Every (combination, fold) pair is an independent fit, so the search runs
//! them on a fixed-size worker pool and reassembles the results in grid
//! order. Apart from the timing columns the report depends only on the grid,
//! the data, `k` and the seed.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SentimentLabel;
use crate::eval::macro_f1;
use crate::shuffle::shuffled_indices;
use crate::svr::{decode_label, encode_label, KernelKind, KernelPoint, SvrError, SvrHyperParams, SvrModel};

pub const DEFAULT_FOLDS: usize = 3;

#[derive(Debug, Error)]
pub enum TuningError {
    #[error("grid field `{0}` is empty")]
    EmptyGrid(&'static str),
    #[error("grid field `{field}`: {reason}")]
    InvalidGrid { field: &'static str, reason: String },
    #[error("cannot make {k} folds from {n} instances (need 2 <= k <= n)")]
    InvalidFolds { k: usize, n: usize },
    #[error("{points} feature vectors but {labels} labels")]
    LengthMismatch { points: usize, labels: usize },
    #[error("fold {fold}: {source}")]
    FoldFailed { fold: usize, source: SvrError },
    #[error("refitting the best combination: {0}")]
    Refit(SvrError),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("grid config: {0}")]
    Config(String),
}

/// Candidate values for each tuned hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    pub c_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub epsilon_values: Vec<f64>,
    pub kernels: Vec<KernelKind>,
}

impl Default for ParamGrid {
    fn default() -> Self {
        Self {
            c_values: vec![0.1, 1.0, 10.0, 100.0],
            gamma_values: vec![0.01, 0.1, 1.0],
            epsilon_values: vec![0.05, 0.1, 0.2],
            kernels: vec![KernelKind::Linear, KernelKind::Rbf],
        }
    }
}

impl ParamGrid {
    pub fn validate(&self) -> Result<(), TuningError> {
        let check = |field: &'static str, values: &[f64], positive: bool| {
            if values.is_empty() {
                return Err(TuningError::EmptyGrid(field));
            }
            for &v in values {
                let ok = v.is_finite() && if positive { v > 0.0 } else { v >= 0.0 };
                if !ok {
                    let want = if positive { "positive" } else { "non-negative" };
                    return Err(TuningError::InvalidGrid {
                        field,
                        reason: format!("{v} is not a {want} real"),
                    });
                }
            }
            Ok(())
        };
        check("c_values", &self.c_values, true)?;
        check("gamma_values", &self.gamma_values, true)?;
        check("epsilon_values", &self.epsilon_values, false)?;
        if self.kernels.is_empty() {
            return Err(TuningError::EmptyGrid("kernels"));
        }
        Ok(())
    }
}

fn sorted_unique(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// All combinations ordered by kernel, then C, then epsilon, then gamma, each
/// ascending and deduplicated. The linear kernel ignores gamma, so linear
/// combinations carry the smallest gamma as a placeholder instead of
/// repeating once per gamma. Fields outside the grid come from `base`.
pub fn expand_grid(grid: &ParamGrid, base: &SvrHyperParams) -> Result<Vec<SvrHyperParams>, TuningError> {
    grid.validate()?;
    let mut kernels = grid.kernels.clone();
    kernels.sort();
    kernels.dedup();
    let cs = sorted_unique(&grid.c_values);
    let epsilons = sorted_unique(&grid.epsilon_values);
    let gammas = sorted_unique(&grid.gamma_values);
    let mut combos = Vec::new();
    for &kernel in &kernels {
        let gammas = match kernel {
            KernelKind::Linear => &gammas[..1],
            KernelKind::Rbf => &gammas[..],
        };
        for &c in &cs {
            for &epsilon in &epsilons {
                for &gamma in gammas {
                    combos.push(SvrHyperParams {
                        kernel,
                        c,
                        epsilon,
                        gamma,
                        ..*base
                    });
                }
            }
        }
    }
    Ok(combos)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles `0..n` with `seed` and cuts it into `k` contiguous test folds;
/// the first `n % k` folds get one extra index.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Fold>, TuningError> {
    if k < 2 || k > n {
        return Err(TuningError::InvalidFolds { k, n });
    }
    let order = shuffled_indices(n, seed);
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let end = start + len;
        folds.push(Fold {
            test: order[start..end].to_vec(),
            train: order[..start].iter().chain(&order[end..]).copied().collect(),
        });
        start = end;
    }
    Ok(folds)
}

/// Cross-validation statistics for one hyperparameter combination. Times
/// are in seconds; standard deviations are population (divide by `k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub params: SvrHyperParams,
    pub mean_fit_time: f64,
    pub std_fit_time: f64,
    pub mean_score_time: f64,
    pub std_score_time: f64,
    pub split_test_score: Vec<f64>,
    pub split_train_score: Vec<f64>,
    pub mean_test_score: f64,
    pub std_test_score: f64,
    pub mean_train_score: f64,
    pub std_train_score: f64,
    pub rank_test_score: usize,
    /// Why the combination was scored 0, if it failed.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchReport {
    pub rows: Vec<CvRow>,
    pub best_index: usize,
    pub best_params: SvrHyperParams,
    pub n_folds: usize,
    pub seed: u64,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

struct FoldData<P> {
    train_x: Vec<P>,
    train_y: Vec<f64>,
    train_labels: Vec<SentimentLabel>,
    test_x: Vec<P>,
    test_labels: Vec<SentimentLabel>,
}

impl<P: Clone> FoldData<P> {
    fn new(fold: &Fold, x: &[P], labels: &[SentimentLabel]) -> Self {
        let pick_x = |idx: &[usize]| idx.iter().map(|&i| x[i].clone()).collect();
        let pick_y = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<_>>();
        let train_labels = pick_y(&fold.train);
        Self {
            train_x: pick_x(&fold.train),
            train_y: train_labels.iter().map(|&l| encode_label(l)).collect(),
            train_labels,
            test_x: pick_x(&fold.test),
            test_labels: pick_y(&fold.test),
        }
    }
}

struct FoldOutcome {
    fit_time: f64,
    score_time: f64,
    test_score: f64,
    train_score: f64,
}

fn predict_labels<P: KernelPoint + Clone>(model: &SvrModel<P>, x: &[P]) -> Result<Vec<SentimentLabel>, SvrError> {
    x.iter().map(|p| decode_label(model.predict(p)?)).collect()
}

fn run_fold<P: KernelPoint + Clone>(params: &SvrHyperParams, data: &FoldData<P>) -> Result<FoldOutcome, SvrError> {
    let t0 = Instant::now();
    let model = SvrModel::fit(params, &data.train_x, &data.train_y)?;
    let fit_time = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let test_pred = predict_labels(&model, &data.test_x)?;
    let score_time = t1.elapsed().as_secs_f64();
    let train_pred = predict_labels(&model, &data.train_x)?;
    // Both label lists are nonempty and equally long, so scoring cannot fail.
    let test_score = macro_f1(&data.test_labels, &test_pred).expect("fold is nonempty");
    let train_score = macro_f1(&data.train_labels, &train_pred).expect("fold is nonempty");
    Ok(FoldOutcome {
        fit_time,
        score_time,
        test_score,
        train_score,
    })
}

fn assemble_row(params: SvrHyperParams, outcomes: Vec<Result<FoldOutcome, SvrError>>) -> CvRow {
    let k = outcomes.len();
    let failure = outcomes.iter().enumerate().find_map(|(f, o)| o.as_ref().err().map(|e| format!("fold {f}: {e}")));
    let ok: Vec<FoldOutcome> = outcomes.into_iter().filter_map(Result::ok).collect();
    let column = |f: fn(&FoldOutcome) -> f64| ok.iter().map(f).collect::<Vec<_>>();
    let (mean_fit_time, std_fit_time) = if ok.is_empty() { (0.0, 0.0) } else { mean_std(&column(|o| o.fit_time)) };
    let (mean_score_time, std_score_time) =
        if ok.is_empty() { (0.0, 0.0) } else { mean_std(&column(|o| o.score_time)) };
    let (split_test_score, split_train_score) = if failure.is_some() {
        (vec![0.0; k], vec![0.0; k])
    } else {
        (column(|o| o.test_score), column(|o| o.train_score))
    };
    let (mean_test_score, std_test_score) = mean_std(&split_test_score);
    let (mean_train_score, std_train_score) = mean_std(&split_train_score);
    if let Some(e) = &failure {
        log::warn!("combination {params:?} failed and is scored 0: {e}");
    }
    CvRow {
        params,
        mean_fit_time,
        std_fit_time,
        mean_score_time,
        std_score_time,
        split_test_score,
        split_train_score,
        mean_test_score,
        std_test_score,
        mean_train_score,
        std_train_score,
        rank_test_score: 1,
        error: failure,
    }
}

fn check_data<P>(x: &[P], labels: &[SentimentLabel], k: usize) -> Result<(), TuningError> {
    if x.len() != labels.len() {
        return Err(TuningError::LengthMismatch {
            points: x.len(),
            labels: labels.len(),
        });
    }
    if k < 2 || k > x.len() {
        return Err(TuningError::InvalidFolds { k, n: x.len() });
    }
    Ok(())
}

/// Cross-validates a single combination. Fit failures are returned as
/// errors tagged with the fold.
pub fn cross_validate<P: KernelPoint + Clone>(
    params: &SvrHyperParams,
    x: &[P],
    labels: &[SentimentLabel],
    k: usize,
    seed: u64,
) -> Result<CvRow, TuningError> {
    check_data(x, labels, k)?;
    let folds = kfold_split(x.len(), k, seed)?;
    let mut outcomes = Vec::with_capacity(k);
    for (f, fold) in folds.iter().enumerate() {
        let data = FoldData::new(fold, x, labels);
        let outcome = run_fold(params, &data).map_err(|source| TuningError::FoldFailed { fold: f, source })?;
        outcomes.push(Ok(outcome));
    }
    Ok(assemble_row(*params, outcomes))
}

/// Competition ranks by descending mean test score: tied rows share the
/// smaller rank.
fn assign_ranks(rows: &mut [CvRow]) {
    let scores: Vec<f64> = rows.iter().map(|r| r.mean_test_score).collect();
    for row in rows.iter_mut() {
        row.rank_test_score = 1 + scores.iter().filter(|&&s| s > row.mean_test_score).count();
    }
}

pub struct SearchOptions {
    pub folds: usize,
    pub seed: u64,
    pub workers: usize,
}

/// Cross-validates every combination in the grid, ranks them and refits the
/// best one (the earliest in grid order among ties) on all the data.
pub fn grid_search<P: KernelPoint + Clone + Send + Sync>(
    combos: &[SvrHyperParams],
    x: &[P],
    labels: &[SentimentLabel],
    opts: &SearchOptions,
) -> Result<(GridSearchReport, SvrModel<P>), TuningError> {
    if combos.is_empty() {
        return Err(TuningError::EmptyGrid("combinations"));
    }
    check_data(x, labels, opts.folds)?;
    if opts.workers == 0 {
        return Err(TuningError::Config("workers must be at least 1".into()));
    }
    let folds = kfold_split(x.len(), opts.folds, opts.seed)?;
    let fold_data: Vec<FoldData<P>> = folds.iter().map(|f| FoldData::new(f, x, labels)).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| TuningError::Pool(e.to_string()))?;
    let tasks: Vec<(usize, usize)> =
        (0..combos.len()).flat_map(|c| (0..fold_data.len()).map(move |f| (c, f))).collect();
    let mut outcomes: Vec<Result<FoldOutcome, SvrError>> =
        pool.install(|| tasks.par_iter().map(|&(c, f)| run_fold(&combos[c], &fold_data[f])).collect());

    let k = fold_data.len();
    let mut rows = Vec::with_capacity(combos.len());
    for params in combos.iter().rev() {
        let per_combo = outcomes.split_off(outcomes.len() - k);
        rows.push(assemble_row(*params, per_combo));
    }
    rows.reverse();
    assign_ranks(&mut rows);

    let best_index = rows
        .iter()
        .position(|r| r.rank_test_score == 1)
        .expect("some row always has rank 1");
    let best_params = rows[best_index].params;
    let targets: Vec<f64> = labels.iter().map(|&l| encode_label(l)).collect();
    let model = SvrModel::fit(&best_params, x, &targets).map_err(TuningError::Refit)?;
    let report = GridSearchReport {
        rows,
        best_index,
        best_params,
        n_folds: opts.folds,
        seed: opts.seed,
    };
    Ok((report, model))
}

impl GridSearchReport {
    /// Tab-separated table, one row per combination. Linear rows show `-`
    /// for gamma, which they do not use.
    pub fn to_table(&self) -> String {
        let mut header = vec![
            "param_C".to_string(),
            "param_kernel".into(),
            "param_epsilon".into(),
            "param_gamma".into(),
            "mean_fit_time".into(),
            "std_fit_time".into(),
            "mean_score_time".into(),
            "std_score_time".into(),
        ];
        header.extend((0..self.n_folds).map(|i| format!("split{i}_test_score")));
        header.extend((0..self.n_folds).map(|i| format!("split{i}_train_score")));
        header.extend(
            ["mean_test_score", "std_test_score", "mean_train_score", "std_train_score", "rank_test_score", "error"]
                .map(String::from),
        );
        let mut out = header.join("\t");
        out.push('\n');
        for r in &self.rows {
            let p = &r.params;
            let gamma = match p.kernel {
                KernelKind::Linear => "-".to_string(),
                KernelKind::Rbf => p.gamma.to_string(),
            };
            let mut cells = vec![p.c.to_string(), p.kernel.to_string(), p.epsilon.to_string(), gamma];
            for t in [r.mean_fit_time, r.std_fit_time, r.mean_score_time, r.std_score_time] {
                cells.push(format!("{t:.6}"));
            }
            for s in r.split_test_score.iter().chain(&r.split_train_score) {
                cells.push(format!("{s:.6}"));
            }
            for s in [r.mean_test_score, r.std_test_score, r.mean_train_score, r.std_train_score] {
                cells.push(format!("{s:.6}"));
            }
            cells.push(r.rank_test_score.to_string());
            cells.push(r.error.clone().unwrap_or_else(|| "-".into()));
            let _ = writeln!(out, "{}", cells.join("\t"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are always serializable")
    }
}

/// Grid search settings as read from a TOML file. Every key is optional;
/// missing ones take the defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub grid: ParamGrid,
    pub folds: usize,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            grid: ParamGrid::default(),
            folds: DEFAULT_FOLDS,
            seed: 0,
            workers: None,
        }
    }
}

/// Deserializes one field of a TOML table, naming it in any error.
pub(crate) fn take_field<T: serde::de::DeserializeOwned>(
    table: &mut toml::Table,
    key: &str,
) -> Result<Option<T>, String> {
    match table.remove(key) {
        None => Ok(None),
        Some(v) => v.try_into().map(Some).map_err(|e| format!("field `{key}`: {}", e.to_string().trim())),
    }
}

pub(crate) fn reject_unknown(table: &toml::Table) -> Result<(), String> {
    match table.keys().next() {
        Some(k) => Err(format!("unknown field `{k}`")),
        None => Ok(()),
    }
}

impl GridConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, TuningError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| TuningError::Config(e.to_string()))?;
        Self::from_table(&mut table).map_err(TuningError::Config)
    }

    /// Consumes the grid keys from `table`, leaving anything else behind.
    pub(crate) fn take_from(table: &mut toml::Table) -> Result<Self, String> {
        let d = Self::default();
        let cfg = Self {
            grid: ParamGrid {
                c_values: take_field(table, "c_values")?.unwrap_or(d.grid.c_values),
                gamma_values: take_field(table, "gamma_values")?.unwrap_or(d.grid.gamma_values),
                epsilon_values: take_field(table, "epsilon_values")?.unwrap_or(d.grid.epsilon_values),
                kernels: take_field(table, "kernels")?.unwrap_or(d.grid.kernels),
            },
            folds: take_field(table, "folds")?.unwrap_or(d.folds),
            seed: take_field(table, "seed")?.unwrap_or(d.seed),
            workers: take_field(table, "workers")?,
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    fn from_table(table: &mut toml::Table) -> Result<Self, String> {
        let cfg = Self::take_from(table)?;
        reject_unknown(table)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), TuningError> {
        self.grid.validate()?;
        if self.folds < 2 {
            return Err(TuningError::InvalidGrid {
                field: "folds",
                reason: format!("must be at least 2, got {}", self.folds),
            });
        }
        if self.workers == Some(0) {
            return Err(TuningError::InvalidGrid {
                field: "workers",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}
