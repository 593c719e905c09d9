use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn toy() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy")
}

fn sentimix(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sentimix"));
    for a in args {
        cmd.arg(a);
    }
    cmd.env("RUST_LOG", "error").output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn resources(dir: &Path) -> Vec<String> {
    vec![
        "--embeddings".into(),
        dir.join("embeddings.txt").display().to_string(),
        "--lexicon-dir".into(),
        dir.join("lexicons").display().to_string(),
        "--easy-words".into(),
        dir.join("easy_words.txt").display().to_string(),
    ]
}

fn run(sub: &str, extra: &[String]) -> Output {
    let mut args: Vec<&dyn AsRef<std::ffi::OsStr>> = vec![&sub];
    for e in extra {
        args.push(e);
    }
    sentimix(&args)
}

fn path_arg(p: &Path) -> String {
    p.display().to_string()
}

fn train(tmp: &TempDir, name: &str, corpus: &Path, extra: &[&str]) -> (Output, PathBuf) {
    let model = tmp.path().join(name);
    let mut args = vec!["--corpus".into(), path_arg(corpus), "--out".into(), path_arg(&model)];
    args.extend(resources(&toy()));
    args.extend(extra.iter().map(|s| s.to_string()));
    (run("train", &args), model)
}

fn predict(tmp: &TempDir, model: &Path, corpus: &Path) -> (Output, PathBuf) {
    let out = tmp.path().join("predictions.tsv");
    let mut args = vec![
        "--corpus".into(),
        path_arg(corpus),
        "--model".into(),
        path_arg(model),
        "--out".into(),
        path_arg(&out),
    ];
    args.extend(resources(&toy()));
    (run("predict", &args), out)
}

#[test]
fn train_predict_evaluate_reproduces_training_labels() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = toy().join("train.txt");
    let (out, model) = train(&tmp, "model.txt", &corpus, &["--c", "10", "--kernel", "linear"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("training instances: 24"));

    let (out, preds) = predict(&tmp, &model, &corpus);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&preds).unwrap();
    assert_eq!(text.lines().count(), 24);
    assert!(text.starts_with("101\tpositive\n102\tnegative\n103\tneutral\n"));

    let json = tmp.path().join("eval.json");
    let out = run(
        "evaluate",
        &["--corpus".into(), path_arg(&corpus), "--predictions".into(), path_arg(&preds), "--out".into(), path_arg(&json)],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.lines().last().unwrap().split_whitespace().eq(["Macro", "avg.", "1.00", "1.00", "1.000", "24"]));
    let dump: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(dump["macro_f1"], 1.0);
}

#[test]
fn retraining_gives_an_identical_model_file() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = toy().join("train.txt");
    let (a, first) = train(&tmp, "a.txt", &corpus, &["--validation-fraction", "0.25", "--seed", "4"]);
    let (b, second) = train(&tmp, "b.txt", &corpus, &["--validation-fraction", "0.25", "--seed", "4"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(fs::read(first).unwrap(), fs::read(second).unwrap());
    assert!(String::from_utf8_lossy(&a.stdout).contains("validation macro F1 (6 instances)"));
}

#[test]
fn unlabeled_corpus_cannot_be_trained_on() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("unlabeled.txt");
    fs::write(&corpus, "meta 1\nachha\tHIN\n\nmeta 2\nbekar\tHIN\n").unwrap();
    let (out, model) = train(&tmp, "model.txt", &corpus, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no labeled instances"));
    assert!(!model.exists());
}

#[test]
fn unlabeled_and_empty_instances_still_get_predictions() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, model) = train(&tmp, "model.txt", &toy().join("train.txt"), &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let corpus = tmp.path().join("test.txt");
    fs::write(&corpus, "meta t1\n...\tO\n\nmeta t2\nachha\tHIN\nmovie\tENG\n\nmeta t3\n@someone\tO\n").unwrap();
    let (out, preds) = predict(&tmp, &model, &corpus);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(preds).unwrap();
    let uids: Vec<&str> = text.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(uids, ["t1", "t2", "t3"]);
    // With no words left, both empty tweets reduce to the same features.
    let labels: Vec<&str> = text.lines().map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(labels[0], labels[2]);
}

#[test]
fn predict_refuses_changed_resources() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, model) = train(&tmp, "model.txt", &toy().join("train.txt"), &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let lex = tmp.path().join("lexicons");
    fs::create_dir(&lex).unwrap();
    for name in ["humor.tsv", "hate.tsv", "offense.tsv"] {
        fs::copy(toy().join("lexicons").join(name), lex.join(name)).unwrap();
    }
    fs::write(lex.join("sentiment.tsv"), "achha\t0.1\n").unwrap();
    let preds = tmp.path().join("p.tsv");
    let args = [
        "--corpus".into(),
        path_arg(&toy().join("train.txt")),
        "--model".into(),
        path_arg(&model),
        "--out".into(),
        path_arg(&preds),
        "--embeddings".into(),
        path_arg(&toy().join("embeddings.txt")),
        "--easy-words".into(),
        path_arg(&toy().join("easy_words.txt")),
        "--lexicon-dir".into(),
        path_arg(&lex),
    ];
    let out = run("predict", &args);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sentiment"), "{}", stderr(&out));
    assert!(!preds.exists());
}

#[test]
fn evaluate_rejects_missing_and_unknown_uids() {
    let tmp = tempfile::tempdir().unwrap();
    let gold = tmp.path().join("gold.txt");
    fs::write(&gold, "meta a positive\nx\tENG\n\nmeta b negative\ny\tENG\n").unwrap();
    for (preds, needle) in [("a\tpositive\n", "no prediction for uid `b`"), ("a\tpositive\nb\tneutral\nc\tneutral\n", "unknown uid `c`")] {
        let p = tmp.path().join("p.tsv");
        fs::write(&p, preds).unwrap();
        let out = run("evaluate", &["--corpus".into(), path_arg(&gold), "--predictions".into(), path_arg(&p)]);
        assert_eq!(out.status.code(), Some(2));
        assert!(stderr(&out).contains(needle), "{}", stderr(&out));
    }
}

fn tune(tmp: &TempDir, tag: &str, grid: &str) -> (Output, PathBuf, PathBuf) {
    let grid_file = tmp.path().join(format!("{tag}.toml"));
    fs::write(&grid_file, grid).unwrap();
    let report = tmp.path().join(format!("{tag}.tsv"));
    let model = tmp.path().join(format!("{tag}.model"));
    let mut args = vec![
        "--corpus".into(),
        path_arg(&toy().join("train.txt")),
        "--grid-config".into(),
        path_arg(&grid_file),
        "--out".into(),
        path_arg(&report),
        "--model".into(),
        path_arg(&model),
    ];
    args.extend(resources(&toy()));
    (run("tune", &args), report, model)
}

#[test]
fn six_combo_grid_reports_six_ranked_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let grid = "c_values = [1.0, 10.0]\ngamma_values = [0.1, 1.0]\nepsilon_values = [0.1]\nkernels = [\"linear\", \"rbf\"]\nworkers = 2\n";
    let (out, report, model) = tune(&tmp, "six", grid);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(model.exists());
    let text = fs::read_to_string(&report).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split('\t').collect();
    let rank_col = header.iter().position(|h| *h == "rank_test_score").unwrap();
    let mut ranks: Vec<usize> = text.lines().skip(1).map(|l| l.split('\t').nth(rank_col).unwrap().parse().unwrap()).collect();
    assert_eq!(ranks.len(), 6);
    ranks.sort();
    assert_eq!(ranks[0], 1);
    // Competition ranking: each rank is one more than the number of rows
    // strictly ahead of it.
    for (i, r) in ranks.iter().enumerate() {
        assert!(*r >= 1 && *r <= i + 1);
    }
    let mut json = report.into_os_string();
    json.push(".json");
    let dump: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(dump["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn single_combo_tune_matches_train() {
    let tmp = tempfile::tempdir().unwrap();
    let grid = "c_values = [3.0]\ngamma_values = [0.2]\nepsilon_values = [0.05]\nkernels = [\"rbf\"]\n";
    let (out, _, tuned) = tune(&tmp, "one", grid);
    assert!(out.status.success(), "{}", stderr(&out));
    let args = ["--c", "3", "--gamma", "0.2", "--epsilon", "0.05", "--kernel", "rbf"];
    let (out, trained) = train(&tmp, "trained.txt", &toy().join("train.txt"), &args);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read(tuned).unwrap(), fs::read(trained).unwrap());
}

#[test]
fn invalid_grid_names_the_field_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    for (grid, field) in [("c_values = [1.0, -2.0]\n", "c_values"), ("kernels = [\"poly\"]\n", "kernels"), ("gammas = [1.0]\n", "gammas")] {
        let (out, report, model) = tune(&tmp, "bad", grid);
        assert_eq!(out.status.code(), Some(1), "{grid}");
        assert!(stderr(&out).contains(field), "{grid}: {}", stderr(&out));
        assert!(!report.exists() && !model.exists());
    }
}

#[test]
fn preprocess_writes_cleaned_words() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("c.txt");
    fs::write(&corpus, "meta 1\n@user\tO\n#CoronaVirus\tO\nse\tHIN\nbacho\tHIN\n!!\tO\n").unwrap();
    let out = run("preprocess", &["--corpus".into(), path_arg(&corpus)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "1\tcorona virus se bacho\n");
}

#[test]
fn exit_codes_separate_usage_and_data_errors() {
    let out = run("train", &["--bogus".into()]);
    assert_eq!(out.status.code(), Some(1));
    let out = run("train", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--corpus"));

    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("bad.txt");
    fs::write(&corpus, "meta 1 positive\nbonjour\tFRA\n").unwrap();
    let (out, _) = train(&tmp, "m.txt", &corpus, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("FRA"));

    let out = run("train", &["--corpus".into(), path_arg(&tmp.path().join("missing.txt")), "--out".into(), "m".into()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(sentimix(&[&"--help"]).status.code(), Some(0));
}

#[test]
fn config_file_paths_resolve_against_its_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tmp.path().join("m.txt");
    let out = run("train", &["--config".into(), path_arg(&toy().join("tune.toml")), "--out".into(), path_arg(&model)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(fs::read_to_string(model).unwrap().contains("embedding_dim 3"));
}
