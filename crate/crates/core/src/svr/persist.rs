//! Model files.
//!
//! A model file is line-oriented UTF-8 text. Fields appear in a fixed order,
//! reals are written with 17 significant digits so they read back bit for
//! bit, and the last line is a SHA-256 of every byte before it:
//!
//! ```text
//! sentimix-model 1
//! kernel rbf
//! c 1.0000000000000000e0
//! epsilon 1.0000000000000001e-1
//! gamma 1.0000000000000001e-1
//! tol 1.0000000000000000e-3
//! cache_size_mb 200
//! coef0 1.0000000000000001e-1
//! max_iter -1
//! shrinking true
//! converged true
//! n_iterations 42
//! bias -3.1250000000000000e-2
//! input_dim 17
//! tfidf 3 4                      vocabulary size, training documents
//! word <idf> <word>              one per vocabulary entry, sorted
//! embedding_dim 2
//! syllable_threshold 3
//! fingerprint embeddings <size>:<sha256>|absent
//! fingerprint humor ...          then hate, offense, sentiment, easy_words
//! support_vectors 2
//! sv <index> <coef> <nnz> <col>:<weight>... | <embedding>... | <aux x12>
//! checksum sha256 <hex>
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{KernelKind, SvrHyperParams, SvrModel};
use crate::features::{FeatureState, FeatureVector, Fingerprint, ResourceFingerprints, TfidfModel, AUX_LEN};

pub const MODEL_FORMAT_VERSION: u32 = 1;

const MAGIC: &str = "sentimix-model";

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("unsupported model format version {found} (this build reads version {MODEL_FORMAT_VERSION})")]
    VersionMismatch { found: String },
    #[error("model file is truncated: {0}")]
    Truncated(String),
    #[error("model file checksum mismatch (recorded {recorded}, computed {computed})")]
    ChecksumMismatch { recorded: String, computed: String },
    #[error("model file line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("cannot serialize model: {0}")]
    Unserializable(String),
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders a model and its feature state in the model file format.
pub fn write_model(model: &SvrModel<FeatureVector>, state: &FeatureState) -> Result<String, ModelFileError> {
    let p = &model.params;
    let vocab = state.tfidf.vocabulary_size();
    let expected_dim = vocab + state.embedding_dim + AUX_LEN;
    if model.input_dim != expected_dim {
        return Err(ModelFileError::Unserializable(format!(
            "model input dimension {} does not match feature state dimension {expected_dim}",
            model.input_dim
        )));
    }
    let mut out = String::new();
    // Writing to a String cannot fail.
    let _ = writeln!(out, "{MAGIC} {MODEL_FORMAT_VERSION}");
    let _ = writeln!(out, "kernel {}", p.kernel);
    let _ = writeln!(out, "c {}", real(p.c));
    let _ = writeln!(out, "epsilon {}", real(p.epsilon));
    let _ = writeln!(out, "gamma {}", real(p.gamma));
    let _ = writeln!(out, "tol {}", real(p.tol));
    let _ = writeln!(out, "cache_size_mb {}", p.cache_size_mb);
    let _ = writeln!(out, "coef0 {}", real(p.coef0));
    let _ = writeln!(out, "max_iter {}", p.max_iter);
    let _ = writeln!(out, "shrinking {}", p.shrinking);
    let _ = writeln!(out, "converged {}", model.converged);
    let _ = writeln!(out, "n_iterations {}", model.n_iterations);
    let _ = writeln!(out, "bias {}", real(model.bias));
    let _ = writeln!(out, "input_dim {}", model.input_dim);
    let _ = writeln!(out, "tfidf {vocab} {}", state.tfidf.n_docs());
    for (word, idf) in state.tfidf.words().iter().zip(state.tfidf.idf_values()) {
        if word.contains(['\n', '\r']) {
            return Err(ModelFileError::Unserializable(format!("vocabulary word {word:?} contains a line break")));
        }
        let _ = writeln!(out, "word {} {word}", real(*idf));
    }
    let _ = writeln!(out, "embedding_dim {}", state.embedding_dim);
    let _ = writeln!(out, "syllable_threshold {}", state.syllable_threshold);
    for (name, fp) in state.fingerprints.entries() {
        let _ = writeln!(out, "fingerprint {name} {fp}");
    }
    let _ = writeln!(out, "support_vectors {}", model.support_vectors.len());
    for ((sv, idx), coef) in model.support_vectors.iter().zip(&model.support_indices).zip(&model.dual_coef) {
        if sv.tfidf_dim != vocab || sv.embedding.len() != state.embedding_dim {
            return Err(ModelFileError::Unserializable(format!(
                "support vector {idx} does not match the feature layout"
            )));
        }
        let _ = write!(out, "sv {idx} {} {}", real(*coef), sv.tfidf.len());
        for (c, w) in &sv.tfidf {
            let _ = write!(out, " {c}:{}", real(*w));
        }
        out.push_str(" |");
        for v in &sv.embedding {
            let _ = write!(out, " {}", real(*v));
        }
        out.push_str(" |");
        for v in &sv.aux {
            let _ = write!(out, " {}", real(*v));
        }
        out.push('\n');
    }
    let digest = hex::encode(Sha256::digest(out.as_bytes()));
    let _ = writeln!(out, "checksum sha256 {digest}");
    Ok(out)
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next line as `(line number, fields after the key)`, requiring `key`.
    fn field(&mut self, key: &str) -> Result<(usize, &'a str), ModelFileError> {
        let (i, line) = self
            .iter
            .next()
            .ok_or_else(|| ModelFileError::Truncated(format!("missing `{key}`")))?;
        let lineno = i + 1;
        match line.split_once(' ') {
            Some((k, rest)) if k == key => Ok((lineno, rest)),
            _ => Err(corrupt(lineno, format!("expected `{key}`"))),
        }
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, ModelFileError> {
        let (line, rest) = self.field(key)?;
        value(line, key, rest)
    }

    fn real(&mut self, key: &str) -> Result<f64, ModelFileError> {
        let (line, rest) = self.field(key)?;
        real_value(line, key, rest)
    }
}

fn corrupt(line: usize, reason: impl Into<String>) -> ModelFileError {
    ModelFileError::Corrupt {
        line,
        reason: reason.into(),
    }
}

fn value<T: std::str::FromStr>(line: usize, what: &str, s: &str) -> Result<T, ModelFileError> {
    s.parse().map_err(|_| corrupt(line, format!("bad {what} `{s}`")))
}

fn real_value(line: usize, what: &str, s: &str) -> Result<f64, ModelFileError> {
    let v: f64 = value(line, what, s)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(corrupt(line, format!("{what} is not finite")))
    }
}

/// Parses a model file. The version is checked first, then the checksum,
/// then the contents.
pub fn read_model(text: &str) -> Result<(SvrModel<FeatureVector>, FeatureState), ModelFileError> {
    let first = text.lines().next().unwrap_or("");
    match first.split_once(' ') {
        Some((MAGIC, v)) if v == MODEL_FORMAT_VERSION.to_string() => {}
        Some((MAGIC, v)) => return Err(ModelFileError::VersionMismatch { found: v.to_string() }),
        _ if text.is_empty() => return Err(ModelFileError::Truncated("file is empty".into())),
        _ => return Err(corrupt(1, "not a model file")),
    }

    let body = text
        .strip_suffix('\n')
        .ok_or_else(|| ModelFileError::Truncated("missing final newline".into()))?;
    let split = body.rfind('\n').map_or(0, |i| i + 1);
    let (payload, last) = body.split_at(split);
    let recorded = last
        .strip_prefix("checksum sha256 ")
        .ok_or_else(|| ModelFileError::Truncated("missing checksum line".into()))?;
    let computed = hex::encode(Sha256::digest(payload.as_bytes()));
    if recorded != computed {
        return Err(ModelFileError::ChecksumMismatch {
            recorded: recorded.to_string(),
            computed,
        });
    }

    let mut lines = Lines {
        iter: payload.lines().enumerate(),
    };
    lines.iter.next();
    let (line, kernel) = lines.field("kernel")?;
    let kernel: KernelKind = kernel.parse().map_err(|e: String| corrupt(line, e))?;
    let params = SvrHyperParams {
        kernel,
        c: lines.real("c")?,
        epsilon: lines.real("epsilon")?,
        gamma: lines.real("gamma")?,
        tol: lines.real("tol")?,
        cache_size_mb: lines.parse("cache_size_mb")?,
        coef0: lines.real("coef0")?,
        max_iter: lines.parse("max_iter")?,
        shrinking: lines.parse("shrinking")?,
    };
    params.validate().map_err(|e| corrupt(line, e.to_string()))?;
    let converged = lines.parse("converged")?;
    let n_iterations = lines.parse("n_iterations")?;
    let bias = lines.real("bias")?;
    let input_dim: usize = lines.parse("input_dim")?;

    let (line, rest) = lines.field("tfidf")?;
    let (v, n_docs) = rest.split_once(' ').ok_or_else(|| corrupt(line, "expected `tfidf <size> <docs>`"))?;
    let vocab: usize = value(line, "vocabulary size", v)?;
    let n_docs: usize = value(line, "document count", n_docs)?;
    let mut words = Vec::with_capacity(vocab.min(1 << 20));
    let mut idf = Vec::with_capacity(vocab.min(1 << 20));
    let mut last_line = line;
    for _ in 0..vocab {
        let (line, rest) = lines.field("word")?;
        let (v, w) = rest.split_once(' ').ok_or_else(|| corrupt(line, "expected `word <idf> <word>`"))?;
        idf.push(real_value(line, "idf", v)?);
        words.push(w.to_string());
        last_line = line;
    }
    let tfidf = TfidfModel::from_parts(words, idf, n_docs).map_err(|e| corrupt(last_line, e.to_string()))?;

    let embedding_dim: usize = lines.parse("embedding_dim")?;
    let syllable_threshold: usize = lines.parse("syllable_threshold")?;
    let mut fingerprints = ResourceFingerprints::absent();
    let names: Vec<&'static str> = fingerprints.entries().iter().map(|(n, _)| *n).collect();
    for name in names {
        let (line, rest) = lines.field("fingerprint")?;
        let (n, fp) = rest.split_once(' ').ok_or_else(|| corrupt(line, "expected `fingerprint <name> <value>`"))?;
        if n != name {
            return Err(corrupt(line, format!("expected fingerprint for {name}, found {n}")));
        }
        let slot = fingerprints.entry_mut(name).expect("name comes from entries()");
        *slot = fp.parse::<Fingerprint>().map_err(|e| corrupt(line, e))?;
    }
    if input_dim != vocab + embedding_dim + AUX_LEN {
        return Err(corrupt(last_line, "input_dim disagrees with the feature layout"));
    }

    let m: usize = lines.parse("support_vectors")?;
    let mut model = SvrModel::constant(params, input_dim, bias);
    model.converged = converged;
    model.n_iterations = n_iterations;
    for _ in 0..m {
        let (line, rest) = lines.field("sv")?;
        let (idx, coef, sv) = parse_support_vector(line, rest, vocab, embedding_dim)?;
        if let Some(&prev) = model.support_indices.last() {
            if idx <= prev {
                return Err(corrupt(line, "support vector indices must increase"));
            }
        }
        model.support_indices.push(idx);
        model.dual_coef.push(coef);
        model.support_vectors.push(sv);
    }
    if let Some((i, _)) = lines.iter.next() {
        return Err(corrupt(i + 1, "unexpected trailing content"));
    }

    let state = FeatureState {
        tfidf,
        embedding_dim,
        syllable_threshold,
        fingerprints,
    };
    Ok((model, state))
}

fn parse_support_vector(
    line: usize,
    rest: &str,
    vocab: usize,
    embedding_dim: usize,
) -> Result<(usize, f64, FeatureVector), ModelFileError> {
    let mut blocks = rest.split('|').map(str::trim);
    let (Some(head), Some(emb), Some(aux), None) = (blocks.next(), blocks.next(), blocks.next(), blocks.next()) else {
        return Err(corrupt(line, "expected three `|`-separated blocks"));
    };
    let mut head = head.split(' ').filter(|s| !s.is_empty());
    let mut next = |what: &str| head.next().ok_or_else(|| corrupt(line, format!("missing {what}")));
    let idx: usize = value(line, "index", next("index")?)?;
    let coef = real_value(line, "coefficient", next("coefficient")?)?;
    let nnz: usize = value(line, "nonzero count", next("nonzero count")?)?;
    let mut tfidf = Vec::with_capacity(nnz.min(vocab));
    for pair in head {
        let (c, w) = pair.split_once(':').ok_or_else(|| corrupt(line, format!("bad entry `{pair}`")))?;
        let c: usize = value(line, "column", c)?;
        if c >= vocab || tfidf.last().is_some_and(|&(p, _)| p >= c) {
            return Err(corrupt(line, format!("column {c} out of order or range")));
        }
        tfidf.push((c, real_value(line, "weight", w)?));
    }
    if tfidf.len() != nnz {
        return Err(corrupt(line, format!("expected {nnz} TF-IDF entries, found {}", tfidf.len())));
    }
    let reals = |block: &str, what: &str| -> Result<Vec<f64>, ModelFileError> {
        block
            .split(' ')
            .filter(|s| !s.is_empty())
            .map(|s| real_value(line, what, s))
            .collect()
    };
    let embedding = reals(emb, "embedding value")?;
    if embedding.len() != embedding_dim {
        return Err(corrupt(line, format!("expected {embedding_dim} embedding values, found {}", embedding.len())));
    }
    let aux: [f64; AUX_LEN] = reals(aux, "aux value")?
        .try_into()
        .map_err(|v: Vec<f64>| corrupt(line, format!("expected {AUX_LEN} aux values, found {}", v.len())))?;
    let fv = FeatureVector {
        tfidf,
        tfidf_dim: vocab,
        embedding,
        aux,
    };
    Ok((idx, coef, fv))
}

/// Writes a model file atomically: readers see the old file or the new one,
/// never a partial write.
pub fn save_model(path: &Path, model: &SvrModel<FeatureVector>, state: &FeatureState) -> Result<(), ModelFileError> {
    let text = write_model(model, state)?;
    write_atomic(path, text.as_bytes()).map_err(|source| ModelFileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<(SvrModel<FeatureVector>, FeatureState), ModelFileError> {
    let text = fs::read_to_string(path).map_err(|source| ModelFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_model(&text)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
