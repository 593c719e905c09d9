use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::FeatureError;
use crate::preprocess::CleanDocument;

/// Word vectors read from a GloVe-style text file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

/// Something odd but recoverable found while loading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadWarning {
    pub line: usize,
    pub message: String,
}

impl EmbeddingTable {
    pub fn new(dim: usize, vectors: HashMap<String, Vec<f64>>) -> Result<Self, FeatureError> {
        if dim == 0 {
            return Err(FeatureError::Embedding {
                line: 0,
                reason: "dimension must be positive".into(),
            });
        }
        for (word, v) in &vectors {
            if v.len() != dim || v.iter().any(|x| !x.is_finite()) {
                return Err(FeatureError::Embedding {
                    line: 0,
                    reason: format!("vector for `{word}` is not {dim} finite reals"),
                });
            }
        }
        Ok(Self { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    /// Mean of the vectors of in-table words (with multiplicity); the zero
    /// vector when nothing matches.
    pub fn pool(&self, doc: &CleanDocument) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        let mut hits = 0usize;
        for v in doc.words.iter().filter_map(|w| self.vectors.get(w)) {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
            hits += 1;
        }
        if hits > 0 {
            let n = hits as f64;
            for a in &mut acc {
                *a /= n;
            }
        }
        acc
    }
}

/// Loads `word v1 ... vd` lines. Duplicate words keep their last vector and
/// are logged as warnings.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable, FeatureError> {
    let text = fs::read_to_string(path).map_err(|source| FeatureError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (table, warnings) = parse_embeddings(&text)?;
    for w in warnings {
        log::warn!("{}:{}: {}", path.display(), w.line, w.message);
    }
    Ok(table)
}

pub fn parse_embeddings(text: &str) -> Result<(EmbeddingTable, Vec<LoadWarning>), FeatureError> {
    let mut dim = None;
    let mut vectors: HashMap<String, Vec<f64>> = HashMap::new();
    let mut warnings = Vec::new();

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else {
            continue;
        };
        let values = fields
            .map(|f| match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(FeatureError::Embedding {
                    line: line_no,
                    reason: format!("component `{f}` is not a finite number"),
                }),
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let expected = *dim.get_or_insert(values.len());
        if values.is_empty() {
            return Err(FeatureError::Embedding {
                line: line_no,
                reason: format!("word `{word}` has no components"),
            });
        }
        if values.len() != expected {
            return Err(FeatureError::Embedding {
                line: line_no,
                reason: format!("expected {expected} components, found {}", values.len()),
            });
        }
        if vectors.insert(word.to_string(), values).is_some() {
            warnings.push(LoadWarning {
                line: line_no,
                message: format!("duplicate word `{word}`; keeping this occurrence"),
            });
        }
    }
    match dim {
        None => Err(FeatureError::Embedding {
            line: 0,
            reason: "no embedding lines".into(),
        }),
        Some(dim) => Ok((EmbeddingTable { dim, vectors }, warnings)),
    }
}
