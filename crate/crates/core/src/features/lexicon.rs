//! Lexicon-backed scorers for humor, hate, offensiveness and word sentiment.
//!
//! Each scorer maps words to a weight and aggregates over a document. They
//! stand in for trained classifiers: anything producing the same outputs can
//! replace them without touching the feature layout.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::FeatureError;
use crate::preprocess::CleanDocument;

/// Label cut on a `[0, 1]` score.
pub const LABEL_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// Weights in `[0, 1]`; the document score is the clamped mean weight.
    BinaryLabelAndScore,
    /// Weights in `[-1, 1]`; the document gets summary statistics.
    PerWordStats,
}

impl Aggregation {
    fn range(self) -> (f64, f64) {
        match self {
            Self::BinaryLabelAndScore => (0.0, 1.0),
            Self::PerWordStats => (-1.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconScorer {
    pub name: String,
    word_scores: HashMap<String, f64>,
    pub aggregation: Aggregation,
}

impl LexiconScorer {
    pub fn new(
        name: impl Into<String>,
        word_scores: HashMap<String, f64>,
        aggregation: Aggregation,
    ) -> Result<Self, FeatureError> {
        let name = name.into();
        let (lo, hi) = aggregation.range();
        if let Some((word, &score)) = word_scores.iter().find(|(_, &s)| !(lo..=hi).contains(&s)) {
            return Err(FeatureError::Lexicon {
                name,
                line: 0,
                reason: format!("score {score} for `{word}` outside [{lo}, {hi}]"),
            });
        }
        Ok(Self {
            name,
            word_scores,
            aggregation,
        })
    }

    pub fn empty(name: impl Into<String>, aggregation: Aggregation) -> Self {
        Self {
            name: name.into(),
            word_scores: HashMap::new(),
            aggregation,
        }
    }

    /// Builds a scorer from `(word, score)` pairs.
    pub fn from_pairs<S: AsRef<str>>(
        name: &str,
        aggregation: Aggregation,
        pairs: &[(S, f64)],
    ) -> Result<Self, FeatureError> {
        let map = pairs.iter().map(|(w, s)| (w.as_ref().to_string(), *s)).collect();
        Self::new(name, map, aggregation)
    }

    pub fn score(&self, word: &str) -> Option<f64> {
        self.word_scores.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.word_scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_scores.is_empty()
    }

    /// Sum of matched weights over the word count, clamped to `[0, 1]`;
    /// zero for an empty document.
    pub fn match_score(&self, doc: &CleanDocument) -> f64 {
        if doc.is_empty() {
            return 0.0;
        }
        let total: f64 = doc.words.iter().filter_map(|w| self.score(w)).sum();
        (total / doc.len() as f64).clamp(0.0, 1.0)
    }
}

/// Reads `word<TAB>score` lines. Blank lines are skipped.
pub fn parse_lexicon(name: &str, text: &str, aggregation: Aggregation) -> Result<LexiconScorer, FeatureError> {
    let (lo, hi) = aggregation.range();
    let mut scores = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| FeatureError::Lexicon {
            name: name.to_string(),
            line: i + 1,
            reason,
        };
        let (word, score) = line
            .split_once('\t')
            .ok_or_else(|| err("expected `word<TAB>score`".into()))?;
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|_| err(format!("score `{score}` is not a number")))?;
        if word.is_empty() || !(lo..=hi).contains(&score) {
            return Err(err(format!("score {score} for `{word}` outside [{lo}, {hi}]")));
        }
        scores.insert(word.to_string(), score);
    }
    Ok(LexiconScorer {
        name: name.to_string(),
        word_scores: scores,
        aggregation,
    })
}

pub fn load_lexicon(path: &Path, name: &str, aggregation: Aggregation) -> Result<LexiconScorer, FeatureError> {
    let text = fs::read_to_string(path).map_err(|source| FeatureError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_lexicon(name, &text, aggregation)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HumorScore {
    pub label: bool,
    pub score: f64,
}

pub fn score_humor(scorer: &LexiconScorer, doc: &CleanDocument) -> HumorScore {
    let score = scorer.match_score(doc);
    HumorScore {
        label: score >= LABEL_THRESHOLD,
        score,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HateOffense {
    pub hate: bool,
    pub offensive: bool,
}

pub fn score_hate_offense(hate: &LexiconScorer, offense: &LexiconScorer, doc: &CleanDocument) -> HateOffense {
    HateOffense {
        hate: hate.match_score(doc) >= LABEL_THRESHOLD,
        offensive: offense.match_score(doc) >= LABEL_THRESHOLD,
    }
}

/// Summary of per-word sentiment; unmatched words score zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SentimentStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub sum: f64,
    pub pos_count: usize,
    pub neg_count: usize,
}

pub fn wordwise_sentiment_stats(scorer: &LexiconScorer, doc: &CleanDocument) -> SentimentStats {
    if doc.is_empty() {
        return SentimentStats::default();
    }
    let scores: Vec<f64> = doc.words.iter().map(|w| scorer.score(w).unwrap_or(0.0)).collect();
    let sum: f64 = scores.iter().sum();
    SentimentStats {
        min: scores.iter().copied().fold(f64::INFINITY, f64::min),
        max: scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: sum / scores.len() as f64,
        sum,
        pos_count: scores.iter().filter(|&&s| s > 0.0).count(),
        neg_count: scores.iter().filter(|&&s| s < 0.0).count(),
    }
}

/// The four scorers the feature block needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicons {
    pub humor: LexiconScorer,
    pub hate: LexiconScorer,
    pub offense: LexiconScorer,
    pub sentiment: LexiconScorer,
}

impl Default for Lexicons {
    fn default() -> Self {
        Self {
            humor: LexiconScorer::empty("humor", Aggregation::BinaryLabelAndScore),
            hate: LexiconScorer::empty("hate", Aggregation::BinaryLabelAndScore),
            offense: LexiconScorer::empty("offense", Aggregation::BinaryLabelAndScore),
            sentiment: LexiconScorer::empty("sentiment", Aggregation::PerWordStats),
        }
    }
}
