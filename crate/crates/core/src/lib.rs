//! Sentiment classification for code-mixed English-Hindi tweets.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! * [`corpus`] reads annotated tweet corpora (`meta` blocks of tagged tokens).
//! * [`preprocess`] strips URLs, mentions, and punctuation and splits hashtags.
//! * [`features`] builds TF-IDF, mean-pooled embedding, and lexicon/readability
//!   blocks into one [`features::FeatureVector`].
//! * [`svr`] fits an epsilon-SVR (linear or RBF kernel) with an SMO dual solver.
//! * [`tuning`] grid-searches SVR hyperparameters with k-fold cross-validation,
//!   and [`eval`] reports per-class and macro precision/recall/F1.
//!
//! The `sentimix` binary wires these together (see [`cli`]).

pub mod cli;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod preprocess;
pub mod shuffle;
pub mod svr;
pub mod tuning;

mod error;

pub use error::{Error, Result};
