//! Document featurization.
//!
//! A [`FeatureVector`] concatenates three blocks in a frozen order:
//!
//! 1. TF-IDF over the training vocabulary (sparse, L2-normalized),
//! 2. the mean of the document's word embeddings,
//! 3. twelve auxiliary values from lexicon scorers and word difficulty
//!    (see [`AUX_NAMES`]).

mod embedding;
mod lexicon;
mod pipeline;
mod readability;
mod tfidf;
mod vector;

use std::path::PathBuf;

use thiserror::Error;

pub use embedding::{load_embeddings, parse_embeddings, EmbeddingTable, LoadWarning};
pub use lexicon::{
    load_lexicon, parse_lexicon, score_hate_offense, score_humor, wordwise_sentiment_stats, Aggregation,
    HateOffense, HumorScore, LexiconScorer, Lexicons, SentimentStats, LABEL_THRESHOLD,
};
pub use pipeline::{
    assemble, FeaturePipeline, FeatureResources, FeatureState, Fingerprint, ResourceFingerprints, ResourcePaths,
    LEXICON_FILES,
};
pub use readability::{
    count_syllables, load_easy_words, parse_easy_words, readability_counts, ReadabilityConfig, ReadabilityCounts,
    DEFAULT_DIFFICULT_SYLLABLES,
};
pub use tfidf::TfidfModel;
pub use vector::{FeatureVector, AUX_LEN, AUX_NAMES};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("empty vocabulary: every training document is empty")]
    EmptyVocabulary,
    #[error("invalid TF-IDF state: {0}")]
    InvalidTfidf(String),
    #[error("embeddings line {line}: {reason}")]
    Embedding { line: usize, reason: String },
    #[error("{name} lexicon line {line}: {reason}")]
    Lexicon { name: String, line: usize, reason: String },
    #[error("{0}")]
    InvalidConfig(String),
    #[error("{resource} file does not match the one the model was fitted with (expected {expected}, found {found})")]
    FingerprintMismatch {
        resource: &'static str,
        expected: String,
        found: String,
    },
}
