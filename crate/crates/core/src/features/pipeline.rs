use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use super::embedding::{load_embeddings, EmbeddingTable};
use super::lexicon::{load_lexicon, score_hate_offense, score_humor, wordwise_sentiment_stats, Aggregation, Lexicons};
use super::readability::{load_easy_words, readability_counts, ReadabilityConfig};
use super::tfidf::TfidfModel;
use super::vector::{FeatureVector, AUX_LEN};
use super::FeatureError;
use crate::preprocess::CleanDocument;

/// Size and SHA-256 of an input file, or `Absent` when none was used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fingerprint {
    Absent,
    File { size: u64, sha256: String },
}

impl Fingerprint {
    pub fn of_bytes(bytes: &[u8]) -> Self {
        Self::File {
            size: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }

    pub fn of_file(path: &Path) -> Result<Self, FeatureError> {
        let bytes = fs::read(path).map_err(|source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::of_bytes(&bytes))
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Absent => f.write_str("absent"),
            Self::File { size, sha256 } => write!(f, "{size}:{sha256}"),
        }
    }
}

impl FromStr for Fingerprint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "absent" {
            return Ok(Self::Absent);
        }
        let (size, hash) = s.split_once(':').ok_or_else(|| format!("bad fingerprint `{s}`"))?;
        let size = size.parse().map_err(|_| format!("bad fingerprint size `{size}`"))?;
        if hash.len() != 64 || !hash.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(format!("bad fingerprint digest `{hash}`"));
        }
        Ok(Self::File {
            size,
            sha256: hash.to_ascii_lowercase(),
        })
    }
}

/// Fingerprints of every external resource a fitted pipeline depends on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceFingerprints {
    pub embeddings: Fingerprint,
    pub humor: Fingerprint,
    pub hate: Fingerprint,
    pub offense: Fingerprint,
    pub sentiment: Fingerprint,
    pub easy_words: Fingerprint,
}

impl ResourceFingerprints {
    pub fn absent() -> Self {
        Self {
            embeddings: Fingerprint::Absent,
            humor: Fingerprint::Absent,
            hate: Fingerprint::Absent,
            offense: Fingerprint::Absent,
            sentiment: Fingerprint::Absent,
            easy_words: Fingerprint::Absent,
        }
    }

    /// `(name, fingerprint)` pairs in persisted order.
    pub fn entries(&self) -> [(&'static str, &Fingerprint); 6] {
        [
            ("embeddings", &self.embeddings),
            ("humor", &self.humor),
            ("hate", &self.hate),
            ("offense", &self.offense),
            ("sentiment", &self.sentiment),
            ("easy_words", &self.easy_words),
        ]
    }

    pub fn entry_mut(&mut self, name: &str) -> Option<&mut Fingerprint> {
        match name {
            "embeddings" => Some(&mut self.embeddings),
            "humor" => Some(&mut self.humor),
            "hate" => Some(&mut self.hate),
            "offense" => Some(&mut self.offense),
            "sentiment" => Some(&mut self.sentiment),
            "easy_words" => Some(&mut self.easy_words),
            _ => None,
        }
    }
}

/// File names looked up inside a lexicon directory. Missing files mean an
/// empty lexicon.
pub const LEXICON_FILES: [(&str, &str); 4] = [
    ("humor", "humor.tsv"),
    ("hate", "hate.tsv"),
    ("offense", "offense.tsv"),
    ("sentiment", "sentiment.tsv"),
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResourcePaths {
    pub embeddings: Option<PathBuf>,
    pub lexicon_dir: Option<PathBuf>,
    pub easy_words: Option<PathBuf>,
}

/// Pre-trained inputs to feature extraction: embeddings, lexicons and the
/// easy-word list, with the fingerprints of the files they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureResources {
    pub embeddings: Option<EmbeddingTable>,
    pub lexicons: Lexicons,
    pub readability: ReadabilityConfig,
    pub fingerprints: ResourceFingerprints,
}

impl Default for FeatureResources {
    fn default() -> Self {
        Self {
            embeddings: None,
            lexicons: Lexicons::default(),
            readability: ReadabilityConfig::default(),
            fingerprints: ResourceFingerprints::absent(),
        }
    }
}

impl FeatureResources {
    pub fn load(paths: &ResourcePaths, syllable_threshold: usize) -> Result<Self, FeatureError> {
        let mut res = Self::default();

        if let Some(path) = &paths.embeddings {
            res.embeddings = Some(load_embeddings(path)?);
            res.fingerprints.embeddings = Fingerprint::of_file(path)?;
        }

        if let Some(dir) = &paths.lexicon_dir {
            if !dir.is_dir() {
                return Err(FeatureError::Io {
                    path: dir.clone(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "lexicon directory not found"),
                });
            }
            for (name, file) in LEXICON_FILES {
                let path = dir.join(file);
                if !path.is_file() {
                    log::info!("{} not found; {name} lexicon left empty", path.display());
                    continue;
                }
                let aggregation = if name == "sentiment" {
                    Aggregation::PerWordStats
                } else {
                    Aggregation::BinaryLabelAndScore
                };
                let scorer = load_lexicon(&path, name, aggregation)?;
                let slot = match name {
                    "humor" => &mut res.lexicons.humor,
                    "hate" => &mut res.lexicons.hate,
                    "offense" => &mut res.lexicons.offense,
                    _ => &mut res.lexicons.sentiment,
                };
                *slot = scorer;
                *res.fingerprints.entry_mut(name).expect("known lexicon name") = Fingerprint::of_file(&path)?;
            }
        }

        let easy = match &paths.easy_words {
            Some(path) => {
                res.fingerprints.easy_words = Fingerprint::of_file(path)?;
                load_easy_words(path)?
            }
            None => Default::default(),
        };
        res.readability = ReadabilityConfig::new(easy, syllable_threshold)?;
        Ok(res)
    }

    pub fn embedding_dim(&self) -> usize {
        self.embeddings.as_ref().map_or(0, EmbeddingTable::dim)
    }
}

/// Builds one feature vector. Blocks: TF-IDF, pooled embedding (empty when
/// no table is given), then the auxiliary layout listed in
/// [`AUX_NAMES`](super::AUX_NAMES).
pub fn assemble(
    tfidf: &TfidfModel,
    table: Option<&EmbeddingTable>,
    lexicons: &Lexicons,
    config: &ReadabilityConfig,
    doc: &CleanDocument,
) -> FeatureVector {
    let humor = score_humor(&lexicons.humor, doc);
    let hate = score_hate_offense(&lexicons.hate, &lexicons.offense, doc);
    let senti = wordwise_sentiment_stats(&lexicons.sentiment, doc);
    let read = readability_counts(config, doc);
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let aux: [f64; AUX_LEN] = [
        flag(humor.label),
        humor.score,
        flag(hate.hate),
        flag(hate.offensive),
        senti.min,
        senti.max,
        senti.mean,
        senti.sum,
        senti.pos_count as f64,
        senti.neg_count as f64,
        read.easy_ratio,
        read.difficult_ratio,
    ];
    FeatureVector {
        tfidf: tfidf.transform(doc),
        tfidf_dim: tfidf.vocabulary_size(),
        embedding: table.map(|t| t.pool(doc)).unwrap_or_default(),
        aux,
    }
}

/// The parts of a fitted pipeline that are persisted with a model.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureState {
    pub tfidf: TfidfModel,
    pub embedding_dim: usize,
    pub syllable_threshold: usize,
    pub fingerprints: ResourceFingerprints,
}

/// Fitted TF-IDF plus the resources it was fitted with.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePipeline {
    tfidf: TfidfModel,
    resources: FeatureResources,
}

impl FeaturePipeline {
    pub fn fit(docs: &[CleanDocument], resources: FeatureResources) -> Result<Self, FeatureError> {
        Ok(Self {
            tfidf: TfidfModel::fit(docs)?,
            resources,
        })
    }

    /// Reattaches persisted state to freshly loaded resources, refusing any
    /// resource whose fingerprint differs from the one recorded at fit time.
    pub fn restore(state: FeatureState, resources: FeatureResources) -> Result<Self, FeatureError> {
        for ((name, expected), (_, found)) in state.fingerprints.entries().into_iter().zip(resources.fingerprints.entries()) {
            if expected != found {
                return Err(FeatureError::FingerprintMismatch {
                    resource: name,
                    expected: expected.to_string(),
                    found: found.to_string(),
                });
            }
        }
        if state.embedding_dim != resources.embedding_dim() {
            return Err(FeatureError::InvalidConfig(format!(
                "model expects {}-dimensional embeddings, got {}",
                state.embedding_dim,
                resources.embedding_dim()
            )));
        }
        if state.syllable_threshold != resources.readability.threshold() {
            return Err(FeatureError::InvalidConfig(format!(
                "model was fitted with syllable threshold {}, got {}",
                state.syllable_threshold,
                resources.readability.threshold()
            )));
        }
        Ok(Self {
            tfidf: state.tfidf,
            resources,
        })
    }

    pub fn state(&self) -> FeatureState {
        FeatureState {
            tfidf: self.tfidf.clone(),
            embedding_dim: self.resources.embedding_dim(),
            syllable_threshold: self.resources.readability.threshold(),
            fingerprints: self.resources.fingerprints.clone(),
        }
    }

    pub fn tfidf(&self) -> &TfidfModel {
        &self.tfidf
    }

    pub fn resources(&self) -> &FeatureResources {
        &self.resources
    }

    pub fn total_dim(&self) -> usize {
        self.tfidf.vocabulary_size() + self.resources.embedding_dim() + AUX_LEN
    }

    pub fn transform(&self, doc: &CleanDocument) -> FeatureVector {
        assemble(
            &self.tfidf,
            self.resources.embeddings.as_ref(),
            &self.resources.lexicons,
            &self.resources.readability,
            doc,
        )
    }
}
