use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::FeatureError;
use crate::preprocess::CleanDocument;

/// Fitted TF-IDF vocabulary.
///
/// Columns are the distinct training words in lexicographic order, and
/// `idf(w) = ln((1 + n_docs) / (1 + df(w))) + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    words: Vec<String>,
    index: HashMap<String, usize>,
    idf: Vec<f64>,
    n_docs: usize,
}

impl TfidfModel {
    pub fn fit(docs: &[CleanDocument]) -> Result<Self, FeatureError> {
        if docs.is_empty() {
            return Err(FeatureError::EmptyVocabulary);
        }
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in docs {
            let distinct: BTreeSet<&str> = doc.words.iter().map(String::as_str).collect();
            for w in distinct {
                *df.entry(w).or_default() += 1;
            }
        }
        if df.is_empty() {
            return Err(FeatureError::EmptyVocabulary);
        }
        let n = docs.len() as f64;
        let (words, idf) = df
            .into_iter()
            .map(|(w, count)| (w.to_string(), ((1.0 + n) / (1.0 + count as f64)).ln() + 1.0))
            .unzip();
        Self::from_parts(words, idf, docs.len())
    }

    /// Rebuilds a model from its persisted columns.
    pub fn from_parts(words: Vec<String>, idf: Vec<f64>, n_docs: usize) -> Result<Self, FeatureError> {
        let invalid = |reason: String| Err(FeatureError::InvalidTfidf(reason));
        if words.is_empty() {
            return Err(FeatureError::EmptyVocabulary);
        }
        if words.len() != idf.len() {
            return invalid(format!("{} words but {} idf values", words.len(), idf.len()));
        }
        if let Some(pair) = words.windows(2).find(|p| p[0] >= p[1]) {
            return invalid(format!("vocabulary not strictly sorted at `{}`", pair[1]));
        }
        if let Some(bad) = idf.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return invalid(format!("idf value {bad} is not a positive real"));
        }
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(Self {
            words,
            index,
            idf,
            n_docs,
        })
    }

    pub fn vocabulary_size(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn idf_values(&self) -> &[f64] {
        &self.idf
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn column(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn idf(&self, word: &str) -> Option<f64> {
        self.column(word).map(|c| self.idf[c])
    }

    /// Raw counts times idf, L2-normalized; out-of-vocabulary words are
    /// ignored. Entries are sorted by column.
    pub fn transform(&self, doc: &CleanDocument) -> Vec<(usize, f64)> {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for w in &doc.words {
            if let Some(c) = self.column(w) {
                *counts.entry(c).or_default() += 1.0;
            }
        }
        let mut weights: Vec<(usize, f64)> = counts.into_iter().map(|(c, n)| (c, n * self.idf[c])).collect();
        let norm = weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in &mut weights {
                *w /= norm;
            }
        }
        weights
    }
}
