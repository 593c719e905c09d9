//! Annotated code-mixed corpora.
//!
//! A corpus file is UTF-8 text made of blocks separated by a single blank
//! line. Each block opens with a header `meta <uid> [<sentiment>]` and is
//! followed by one or more token lines `<surface>\t<tag>`:
//!
//! ```text
//! meta 17 positive
//! Corona	ENG
//! achha	HIN
//!
//! meta 18
//! kal	HIN
//! ```
//!
//! Trailing whitespace on any line is ignored.

// The format example above needs its literal tabs.
#![allow(clippy::tabs_in_doc_comments)]

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::shuffle::shuffled_indices;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: malformed meta line: {reason}")]
    MalformedMeta { line: usize, reason: String },
    #[error("line {line}: malformed token line: {reason}")]
    MalformedToken { line: usize, reason: String },
    #[error("line {line}: unknown language tag `{tag}`")]
    UnknownTag { line: usize, tag: String },
    #[error("line {line}: unknown sentiment label `{label}`")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: duplicate uid `{uid}` (first used on line {first})")]
    DuplicateUid {
        line: usize,
        uid: String,
        first: usize,
    },
    #[error("line {line}: block `{uid}` has no token lines")]
    EmptyTokens { line: usize, uid: String },
    #[error("line {line}: {reason}")]
    Layout { line: usize, reason: String },
    #[error("validation fraction {0} must lie strictly between 0 and 1")]
    BadFraction(f64),
    #[error("cannot split {n} instances with fraction {fraction}: both parts need at least one instance")]
    TooSmall { n: usize, fraction: f64 },
}

/// Three-way tweet sentiment. The derived order (negative < neutral <
/// positive) is the canonical encoding order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Negative,
    Neutral,
    Positive,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 3] = [Self::Negative, Self::Neutral, Self::Positive];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Negative => "negative",
            Self::Neutral => "neutral",
            Self::Positive => "positive",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentimentLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "negative" => Ok(Self::Negative),
            "neutral" => Ok(Self::Neutral),
            "positive" => Ok(Self::Positive),
            other => Err(other.to_string()),
        }
    }
}

/// Word-level language tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LangTag {
    #[serde(rename = "ENG")]
    Eng,
    #[serde(rename = "HIN")]
    Hin,
    /// Symbols, mentions, hashtags.
    #[serde(rename = "O")]
    Other,
}

impl LangTag {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Eng => "ENG",
            Self::Hin => "HIN",
            Self::Other => "O",
        }
    }
}

impl fmt::Display for LangTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LangTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ENG" => Ok(Self::Eng),
            "HIN" => Ok(Self::Hin),
            "O" => Ok(Self::Other),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub tag: LangTag,
}

/// One tweet with per-token language tags and an optional gold label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeMixedInstance {
    pub uid: String,
    pub tokens: Vec<Token>,
    pub label: Option<SentimentLabel>,
}

impl CodeMixedInstance {
    /// Token surfaces joined by single spaces.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&t.surface);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSplit {
    pub train: Vec<CodeMixedInstance>,
    pub validation: Vec<CodeMixedInstance>,
    pub seed: u64,
}

pub fn parse_corpus(path: &Path) -> Result<Vec<CodeMixedInstance>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_corpus_str(&text)
}

struct OpenBlock {
    header_line: usize,
    uid: String,
    label: Option<SentimentLabel>,
    tokens: Vec<Token>,
}

pub fn parse_corpus_str(text: &str) -> Result<Vec<CodeMixedInstance>, CorpusError> {
    let mut out = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut block: Option<OpenBlock> = None;
    let mut blank_run = 0usize;

    let finish = |b: OpenBlock, out: &mut Vec<CodeMixedInstance>| -> Result<(), CorpusError> {
        if b.tokens.is_empty() {
            return Err(CorpusError::EmptyTokens {
                line: b.header_line,
                uid: b.uid,
            });
        }
        out.push(CodeMixedInstance {
            uid: b.uid,
            tokens: b.tokens,
            label: b.label,
        });
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end();

        if line.is_empty() {
            if let Some(b) = block.take() {
                finish(b, &mut out)?;
            }
            blank_run += 1;
            continue;
        }
        // Blank lines are only tolerated singly between blocks, or in any
        // number at end of file.
        if blank_run > 0 && out.is_empty() {
            return Err(CorpusError::Layout {
                line: line_no - blank_run,
                reason: "blank line before the first block".into(),
            });
        }
        if blank_run > 1 {
            return Err(CorpusError::Layout {
                line: line_no - blank_run + 1,
                reason: "blocks must be separated by exactly one blank line".into(),
            });
        }
        blank_run = 0;

        if line.contains('\t') {
            let Some(b) = block.as_mut() else {
                return Err(CorpusError::MalformedToken {
                    line: line_no,
                    reason: "token line outside a meta block".into(),
                });
            };
            b.tokens.push(parse_token_line(line, line_no)?);
            continue;
        }

        if let Some(b) = block.take() {
            if b.tokens.is_empty() {
                finish(b, &mut out)?;
            }
            return Err(CorpusError::Layout {
                line: line_no,
                reason: "missing blank line before meta header".into(),
            });
        }
        let (uid, label) = parse_meta_line(line, line_no)?;
        if let Some(&first) = seen.get(&uid) {
            return Err(CorpusError::DuplicateUid {
                line: line_no,
                uid,
                first,
            });
        }
        seen.insert(uid.clone(), line_no);
        block = Some(OpenBlock {
            header_line: line_no,
            uid,
            label,
            tokens: Vec::new(),
        });
    }
    if let Some(b) = block.take() {
        finish(b, &mut out)?;
    }
    Ok(out)
}

fn parse_meta_line(line: &str, line_no: usize) -> Result<(String, Option<SentimentLabel>), CorpusError> {
    let malformed = |reason: &str| CorpusError::MalformedMeta {
        line: line_no,
        reason: reason.to_string(),
    };
    let parts: Vec<&str> = line.split(' ').collect();
    if parts[0] != "meta" {
        return Err(malformed("expected `meta <uid> [<sentiment>]`"));
    }
    match parts.as_slice() {
        [_, uid] | [_, uid, _] if uid.is_empty() => Err(malformed("empty uid")),
        [_, uid] => Ok((uid.to_string(), None)),
        [_, uid, label] => {
            let label = label.parse().map_err(|label| CorpusError::UnknownLabel {
                line: line_no,
                label,
            })?;
            Ok((uid.to_string(), Some(label)))
        }
        [_] => Err(malformed("missing uid")),
        _ => Err(malformed("too many fields")),
    }
}

fn parse_token_line(line: &str, line_no: usize) -> Result<Token, CorpusError> {
    let mut parts = line.split('\t');
    let surface = parts.next().unwrap_or_default();
    let tag = parts.next().unwrap_or_default();
    if parts.next().is_some() {
        return Err(CorpusError::MalformedToken {
            line: line_no,
            reason: "more than one tab".into(),
        });
    }
    if surface.is_empty() {
        return Err(CorpusError::MalformedToken {
            line: line_no,
            reason: "empty surface".into(),
        });
    }
    let tag = tag.parse().map_err(|tag| CorpusError::UnknownTag { line: line_no, tag })?;
    Ok(Token {
        surface: surface.to_string(),
        tag,
    })
}

/// Renders instances in the block format read by [`parse_corpus_str`].
pub fn write_corpus_string(corpus: &[CodeMixedInstance]) -> String {
    let mut out = String::new();
    for (i, inst) in corpus.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str("meta ");
        out.push_str(&inst.uid);
        if let Some(label) = inst.label {
            out.push(' ');
            out.push_str(label.as_str());
        }
        out.push('\n');
        for t in &inst.tokens {
            out.push_str(&t.surface);
            out.push('\t');
            out.push_str(t.tag.as_str());
            out.push('\n');
        }
    }
    out
}

/// Seeded shuffle, then the first `round(fraction * n)` shuffled instances
/// become the validation part and the rest the training part.
pub fn split_corpus(
    corpus: &[CodeMixedInstance],
    validation_fraction: f64,
    seed: u64,
) -> Result<CorpusSplit, CorpusError> {
    if !(validation_fraction > 0.0 && validation_fraction < 1.0) {
        return Err(CorpusError::BadFraction(validation_fraction));
    }
    let n = corpus.len();
    let n_val = (validation_fraction * n as f64).round() as usize;
    if n < 2 || n_val == 0 || n_val >= n {
        return Err(CorpusError::TooSmall {
            n,
            fraction: validation_fraction,
        });
    }
    let order = shuffled_indices(n, seed);
    let validation = order[..n_val].iter().map(|&i| corpus[i].clone()).collect();
    let train = order[n_val..].iter().map(|&i| corpus[i].clone()).collect();
    Ok(CorpusSplit {
        train,
        validation,
        seed,
    })
}

/// Label counts over labeled instances; every label is present as a key.
pub fn class_histogram(corpus: &[CodeMixedInstance]) -> BTreeMap<SentimentLabel, usize> {
    let mut counts: BTreeMap<SentimentLabel, usize> =
        SentimentLabel::ALL.iter().map(|&l| (l, 0)).collect();
    for label in corpus.iter().filter_map(|i| i.label) {
        *counts.entry(label).or_default() += 1;
    }
    counts
}

/// Uids must be unique within a corpus; returns the first repeated one.
pub fn first_duplicate_uid(corpus: &[CodeMixedInstance]) -> Option<&str> {
    let mut seen = HashSet::new();
    corpus
        .iter()
        .find(|inst| !seen.insert(inst.uid.as_str()))
        .map(|inst| inst.uid.as_str())
}
