//! Acceptance criteria, one line of output each. Runs without the libtest
//! harness so every criterion reports even when an earlier one fails; the
//! process exits non-zero if any criterion fails.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::oracle;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use sentimix::corpus::SentimentLabel;
use sentimix::eval::{format_report, macro_f1, report, ConfusionMatrix, EvalReport};
use sentimix::features::{FeaturePipeline, FeatureResources, ResourcePaths, TfidfModel};
use sentimix::preprocess::{clean_text, CleanDocument};
use sentimix::svr::{decode_label, encode_label, load_model, save_model, KernelKind, SvrHyperParams, SvrModel};
use sentimix::tuning::{cross_validate, expand_grid, grid_search, ParamGrid, SearchOptions};

// Tolerances and budgets, as stated by each criterion.
const METRIC_F1_TOL: f64 = 5e-4;
const METRIC_MACRO_F1_TOL: f64 = 0.01;
const METRIC_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_OBJECTIVE_TOL: f64 = 1e-6;
const ORACLE_KKT_TOL: f64 = 1e-3;
const ORACLE_DATASETS: usize = 200;
const ORACLE_BUDGET: Duration = Duration::from_secs(120);
const ANALYTIC_TOL: f64 = 1e-4;
const TFIDF_WEIGHT_TOL: f64 = 1e-6;
const TFIDF_NORM_TOL: f64 = 1e-12;
const TFIDF_RANDOM_DOCS: usize = 1000;
const GOLDEN_TWEETS: usize = 50;
const GRID_MIN_HELDOUT_F1: f64 = 0.90;
const GRID_WORKERS: usize = 4;
const GRID_BUDGET: Duration = Duration::from_secs(120);
const ROUND_TRIP_INPUTS: usize = 100;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    check(took < budget, || format!("took {took:.2?}, budget {budget:?}"))?;
    Ok(took)
}

fn metric_arithmetic() -> Outcome {
    let start = Instant::now();
    let rounded = EvalReport::from_per_class([(0.68, 0.68, 900), (0.57, 0.59, 1100), (0.75, 0.72, 1000)]);
    for (class, want) in rounded.per_class.iter().zip([0.68, 0.580, 0.735]) {
        check((class.f1 - want).abs() <= METRIC_F1_TOL, || {
            format!("{} F1 {:.6}, expected {want}", class.label.as_str(), class.f1)
        })?;
    }
    check((rounded.macro_f1 - 0.662).abs() <= METRIC_MACRO_F1_TOL, || {
        format!("macro F1 {:.6} not within {METRIC_MACRO_F1_TOL} of 0.662", rounded.macro_f1)
    })?;

    // Integer counts whose unrounded scores round to every reference cell
    // below (supports 900/1100/1000).
    let matrix = ConfusionMatrix {
        counts: [[609, 253, 38], [250, 645, 205], [41, 240, 719]],
    };
    let table = format_report(&report(&matrix));
    let rows: Vec<Vec<&str>> = table.lines().skip(1).map(|l| l.split_whitespace().collect()).collect();
    let expected: [&[&str]; 4] = [
        &["negative", "0.68", "0.68", "0.68", "900"],
        &["neutral", "0.57", "0.59", "0.58", "1100"],
        &["positive", "0.75", "0.72", "0.74", "1000"],
        &["Macro", "avg.", "0.66", "0.66", "0.662", "3000"],
    ];
    for (got, want) in rows.iter().zip(expected) {
        for (col, (g, w)) in got.iter().zip(want).enumerate() {
            // Positive F1 may round either way from unrounded inputs.
            let lenient = got[0] == "positive" && col == 3 && (*g == "0.73" || *g == "0.74");
            check(g == w || lenient, || format!("cell `{g}` where the reference has `{w}`:\n{table}"))?;
        }
    }
    check(rows.len() == 4, || format!("expected 4 rows:\n{table}"))?;
    let took = within_budget(start, METRIC_BUDGET)?;
    Ok(format!(
        "rounded-input macro F1 {:.4}, count table macro row `{}` ({took:.2?})",
        rounded.macro_f1,
        rows[3][2..].join(" ")
    ))
}

fn svr_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let (mut worst_gap, mut worst_kkt, mut over) = (0.0f64, 0.0f64, 0usize);
    for i in 0..ORACLE_DATASETS {
        let n = rng.random_range(1..=6);
        let d = rng.random_range(1..=3);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let kernel = if i % 2 == 0 { KernelKind::Linear } else { KernelKind::Rbf };
        let c = [0.5, 10.0][rng.random_range(0..2)];
        let eps = [0.0, 0.1][rng.random_range(0..2)];
        let params = SvrHyperParams { c, epsilon: eps, gamma: 0.5, kernel, tol: ORACLE_KKT_TOL, ..Default::default() };
        let k = match kernel {
            KernelKind::Linear => oracle::gram(&x, oracle::linear_kernel),
            KernelKind::Rbf => oracle::gram(&x, oracle::rbf_kernel(0.5)),
        };
        let model = SvrModel::fit(&params, &x, &y).map_err(|e| format!("dataset {i}: {e}"))?;
        let beta = model.dense_coefficients(n);
        let best = oracle::solve(&k, &y, c, eps).ok_or_else(|| format!("dataset {i}: oracle found no optimum"))?;
        let gap = (oracle::objective(&k, &y, &beta, eps) - best.objective).abs();
        let kkt = oracle::kkt_violation(&k, &y, &beta, model.bias, c, eps);
        worst_gap = worst_gap.max(gap);
        worst_kkt = worst_kkt.max(kkt);
        over += usize::from(gap > ORACLE_OBJECTIVE_TOL);
    }
    let took = start.elapsed();
    let summary = format!(
        "worst objective gap {worst_gap:.2e} (limit {ORACLE_OBJECTIVE_TOL:.0e}, {over}/{ORACLE_DATASETS} over), \
         worst KKT violation {worst_kkt:.2e} (limit {ORACLE_KKT_TOL:.0e}), {took:.2?}"
    );
    let ok = over == 0 && worst_kkt <= ORACLE_KKT_TOL && took < ORACLE_BUDGET;
    if ok {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn analytic_svr() -> Outcome {
    let x = vec![vec![0.0], vec![1.0]];
    let params = SvrHyperParams { c: 10.0, epsilon: 0.1, kernel: KernelKind::Linear, ..Default::default() };
    let model = SvrModel::fit(&params, &x, &[0.0, 1.0]).map_err(|e| e.to_string())?;
    let got = model.predict_many(&x).map_err(|e| e.to_string())?;
    for (g, want) in got.iter().zip([0.1, 0.9]) {
        check((g - want).abs() <= ANALYTIC_TOL, || format!("predicted {got:?}, expected [0.1, 0.9]"))?;
    }
    Ok(format!("f(0) = {:.6}, f(1) = {:.6}", got[0], got[1]))
}

fn tfidf_fixtures() -> Outcome {
    let docs = [CleanDocument::from_words(&["cat", "sat"]), CleanDocument::from_words(&["cat", "ran"])];
    let model = TfidfModel::fit(&docs).map_err(|e| e.to_string())?;
    check(model.words() == ["cat", "ran", "sat"], || format!("vocabulary {:?}", model.words()))?;
    let idf_sat = model.idf("sat").unwrap_or(f64::NAN);
    check((idf_sat - 1.4054651081081644).abs() <= TFIDF_WEIGHT_TOL, || format!("idf(sat) = {idf_sat}"))?;
    let got = model.transform(&docs[0]);
    let want = [(0usize, 0.5797386715376657), (2usize, 0.8148024746671689)];
    check(got.len() == 2, || format!("weights {got:?}"))?;
    for (&(gc, gw), (wc, ww)) in got.iter().zip(want) {
        check(gc == wc && (gw - ww).abs() <= TFIDF_WEIGHT_TOL, || format!("weights {got:?}, expected {want:?}"))?;
    }

    let mut rng = StdRng::seed_from_u64(2);
    let vocab: Vec<String> = (0..60).map(|i| format!("w{i}")).collect();
    let random_doc = |max_len: usize, rng: &mut StdRng| {
        let len = rng.random_range(0..=max_len);
        CleanDocument::new("", (0..len).map(|_| vocab[rng.random_range(0..vocab.len())].clone()).collect())
    };
    let train: Vec<CleanDocument> = (0..50).map(|_| random_doc(8, &mut rng)).collect();
    let model = TfidfModel::fit(&train).map_err(|e| e.to_string())?;
    let mut zero = 0;
    let mut worst: f64 = 0.0;
    // Words beyond the fitted vocabulary produce all-zero documents too.
    let extended: Vec<String> = (0..90).map(|i| format!("w{i}")).collect();
    for _ in 0..TFIDF_RANDOM_DOCS {
        let len = rng.random_range(0..=12);
        let doc = CleanDocument::new("", (0..len).map(|_| extended[rng.random_range(0..extended.len())].clone()).collect());
        let norm = model.transform(&doc).iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm == 0.0 {
            zero += 1;
        } else {
            worst = worst.max((norm - 1.0).abs());
        }
    }
    check(worst <= TFIDF_NORM_TOL, || format!("a norm is {worst:.2e} away from 1"))?;
    Ok(format!("2-doc weights match; {TFIDF_RANDOM_DOCS} random docs, {zero} zero, worst |norm-1| {worst:.1e}"))
}

fn golden_preprocessing() -> Outcome {
    let dir = fixtures().join("golden");
    let tweets = fs::read_to_string(dir.join("tweets.tsv")).map_err(|e| e.to_string())?;
    let expected = fs::read_to_string(dir.join("expected.tsv")).map_err(|e| e.to_string())?;
    let mut actual = String::new();
    let mut count = 0;
    for line in tweets.lines() {
        let (uid, text) = line.split_once('\t').ok_or_else(|| format!("bad fixture line `{line}`"))?;
        actual.push_str(&format!("{uid}\t{}\n", clean_text(text).join(" ")));
        count += 1;
    }
    check(count == GOLDEN_TWEETS, || format!("{count} tweets in fixture"))?;
    check(expected.lines().any(|l| l.ends_with("\tcorona virus")), || "no `corona virus` line".into())?;
    if actual != expected {
        let diff = actual
            .lines()
            .zip(expected.lines())
            .find(|(a, e)| a != e)
            .map_or("line count differs".to_string(), |(a, e)| format!("got `{a}`, stored `{e}`"));
        return Err(diff);
    }
    Ok(format!("{count} tweets byte-identical"))
}

/// Three Gaussian clusters, one per class, `per_class` points each.
fn clusters(per_class: usize, rng: &mut StdRng) -> (Vec<Vec<f64>>, Vec<SentimentLabel>) {
    let centers = [[-2.0, -1.0, 0.5, 0.0], [0.0, 1.5, -0.5, 1.0], [2.0, -1.0, 0.0, -1.0]];
    let noise = Normal::new(0.0, 0.6).expect("valid normal");
    let mut x = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..per_class {
        for (center, label) in centers.iter().zip(SentimentLabel::ALL) {
            x.push(center.iter().map(|c| c + noise.sample(rng)).collect());
            labels.push(label);
        }
    }
    (x, labels)
}

fn grid_search_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(5);
    let (x, labels) = clusters(100, &mut rng);
    let (train_x, test_x) = x.split_at(200);
    let (train_y, test_y) = labels.split_at(200);
    let combos = expand_grid(&ParamGrid::default(), &SvrHyperParams::default()).map_err(|e| e.to_string())?;
    let opts = SearchOptions { folds: 3, seed: 9, workers: GRID_WORKERS };
    let (report, model) = grid_search(&combos, train_x, train_y, &opts).map_err(|e| e.to_string())?;

    let mut best = (0, f64::NEG_INFINITY);
    for (i, params) in combos.iter().enumerate() {
        let row = cross_validate(params, train_x, train_y, opts.folds, opts.seed).map_err(|e| e.to_string())?;
        check(row.split_test_score == report.rows[i].split_test_score, || format!("combo {i} scores differ"))?;
        if row.mean_test_score > best.1 {
            best = (i, row.mean_test_score);
        }
    }
    check(report.best_index == best.0 && report.rows[best.0].rank_test_score == 1, || {
        format!("report picked combo {}, independent argmax is {}", report.best_index, best.0)
    })?;

    let pred: Vec<SentimentLabel> = test_x
        .iter()
        .map(|p| decode_label(model.predict(p)?))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let score = macro_f1(test_y, &pred).map_err(|e| e.to_string())?;
    check(score >= GRID_MIN_HELDOUT_F1, || format!("held-out macro F1 {score:.4} < {GRID_MIN_HELDOUT_F1}"))?;
    let took = within_budget(start, GRID_BUDGET)?;
    Ok(format!(
        "{} combos, best #{} ({} C={} eps={}), held-out macro F1 {score:.4}, {took:.2?}",
        combos.len(),
        best.0,
        report.best_params.kernel,
        report.best_params.c,
        report.best_params.epsilon
    ))
}

const TIMING_COLUMNS: [&str; 4] = ["mean_fit_time", "std_fit_time", "mean_score_time", "std_score_time"];

fn without_timings_tsv(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split('\t').collect();
    let keep: Vec<bool> = header.iter().map(|h| !TIMING_COLUMNS.contains(h)).collect();
    std::iter::once(header.join("\t"))
        .chain(lines.map(str::to_string))
        .map(|l| l.split('\t').zip(&keep).filter(|(_, k)| **k).map(|(v, _)| v.to_string()).collect())
        .collect()
}

fn without_timings_json(text: &str) -> Result<serde_json::Value, String> {
    let mut v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    for row in v["rows"].as_array_mut().ok_or("report JSON has no rows")? {
        let obj = row.as_object_mut().ok_or("row is not an object")?;
        for col in TIMING_COLUMNS {
            obj.remove(col);
        }
    }
    Ok(v)
}

fn deterministic_tune() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = fixtures().join("toy/tune.toml");
    let run = |tag: &str| -> Result<(String, String, Vec<u8>), String> {
        let report = dir.path().join(format!("{tag}.tsv"));
        let model = dir.path().join(format!("{tag}.model"));
        let out = Command::new(env!("CARGO_BIN_EXE_sentimix"))
            .arg("tune")
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&report)
            .arg("--model")
            .arg(&model)
            .output()
            .map_err(|e| e.to_string())?;
        check(out.status.success(), || format!("tune failed: {}", String::from_utf8_lossy(&out.stderr)))?;
        let mut json = report.clone().into_os_string();
        json.push(".json");
        let read = |p: &Path| fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()));
        Ok((read(&report)?, read(Path::new(&json))?, fs::read(&model).map_err(|e| e.to_string())?))
    };
    let (tsv_a, json_a, model_a) = run("a")?;
    let (tsv_b, json_b, model_b) = run("b")?;
    check(without_timings_tsv(&tsv_a) == without_timings_tsv(&tsv_b), || "report tables differ".into())?;
    check(without_timings_json(&json_a)? == without_timings_json(&json_b)?, || "JSON reports differ".into())?;
    check(model_a == model_b, || "model files differ".into())?;
    Ok(format!("reports equal modulo timings, model files byte-identical ({} bytes)", model_a.len()))
}

fn round_trip() -> Outcome {
    let toy = fixtures().join("toy");
    let paths = ResourcePaths {
        embeddings: Some(toy.join("embeddings.txt")),
        lexicon_dir: Some(toy.join("lexicons")),
        easy_words: Some(toy.join("easy_words.txt")),
    };
    let corpus = sentimix::corpus::parse_corpus(&toy.join("train.txt")).map_err(|e| e.to_string())?;
    let docs: Vec<CleanDocument> = corpus.iter().map(sentimix::preprocess::clean).collect();
    let resources = FeatureResources::load(&paths, 3).map_err(|e| e.to_string())?;
    let pipeline = FeaturePipeline::fit(&docs, resources).map_err(|e| e.to_string())?;
    let x: Vec<_> = docs.iter().map(|d| pipeline.transform(d)).collect();
    let y: Vec<f64> = corpus.iter().map(|i| encode_label(i.label.expect("toy corpus is labeled"))).collect();
    let vocab = pipeline.tfidf().words().to_vec();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(8);
    let mut checked = 0;
    for kernel in [KernelKind::Linear, KernelKind::Rbf] {
        let params = SvrHyperParams { kernel, c: 3.0, gamma: 0.3, ..Default::default() };
        let model = SvrModel::fit(&params, &x, &y).map_err(|e| e.to_string())?;
        let path = dir.path().join(format!("{kernel}.model"));
        save_model(&path, &model, &pipeline.state()).map_err(|e| e.to_string())?;
        let (loaded, state) = load_model(&path).map_err(|e| e.to_string())?;
        let resources = FeatureResources::load(&paths, state.syllable_threshold).map_err(|e| e.to_string())?;
        let restored = FeaturePipeline::restore(state, resources).map_err(|e| e.to_string())?;
        for _ in 0..ROUND_TRIP_INPUTS / 2 {
            let len = rng.random_range(0..8);
            let words: Vec<String> = (0..len)
                .map(|_| match rng.random_range(0..4) {
                    0 => "unseen".to_string(),
                    _ => vocab[rng.random_range(0..vocab.len())].clone(),
                })
                .collect();
            let doc = CleanDocument::new("", words);
            let a = model.predict(&pipeline.transform(&doc)).map_err(|e| e.to_string())?;
            let b = loaded.predict(&restored.transform(&doc)).map_err(|e| e.to_string())?;
            check(a.to_bits() == b.to_bits(), || format!("{kernel}: {a:e} before saving, {b:e} after loading"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} predictions bit-identical after reload"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("per-class metric arithmetic", metric_arithmetic),
        ("SVR oracle equivalence", svr_oracle_equivalence),
        ("analytic SVR case", analytic_svr),
        ("TF-IDF fixtures", tfidf_fixtures),
        ("preprocessing golden corpus", golden_preprocessing),
        ("grid-search correctness", grid_search_correctness),
        ("tune determinism", deterministic_tune),
        ("model round-trip", round_trip),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
