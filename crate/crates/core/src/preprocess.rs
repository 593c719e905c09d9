//! Tweet normalization.
//!
//! [`clean`] runs five steps in a fixed order: URLs, mentions, hashtag
//! splitting, punctuation/symbols, whitespace. Punctuation stripping would
//! otherwise eat the `://`, `@` and `#` markers the earlier steps key on.
//! The result is lowercased last so hashtag splitting can still see case.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::CodeMixedInstance;

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@[\p{L}\p{Nd}_]+").unwrap());
static HASHTAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#+([\p{L}\p{Nd}_]+)").unwrap());
static PUNCT_OR_SYMBOL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[\p{P}\p{S}]").unwrap());

/// A tweet reduced to lowercase words.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CleanDocument {
    pub words: Vec<String>,
    pub source_uid: String,
}

impl CleanDocument {
    pub fn new(source_uid: impl Into<String>, words: Vec<String>) -> Self {
        Self {
            words,
            source_uid: source_uid.into(),
        }
    }

    pub fn from_words<S: AsRef<str>>(words: &[S]) -> Self {
        Self::new("", words.iter().map(|w| w.as_ref().to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Removes `http://`, `https://` and `www.` runs up to the next whitespace.
pub fn strip_urls(text: &str) -> String {
    URL.replace_all(text, "").into_owned()
}

/// Removes `@` followed by letters, digits, or underscores.
pub fn strip_mentions(text: &str) -> String {
    MENTION.replace_all(text, "").into_owned()
}

/// Replaces every `#Body` with the words of `Body` split at case and digit
/// boundaries, e.g. `#COVID19Update` becomes `COVID 19 Update`.
pub fn extract_hashtag_words(text: &str) -> String {
    HASHTAG
        .replace_all(text, |caps: &regex::Captures<'_>| segment_hashtag(&caps[1]).join(" "))
        .into_owned()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Upper,
    Lower,
    Digit,
    Other,
}

fn classify(c: char) -> CharClass {
    if c.is_numeric() {
        CharClass::Digit
    } else if c.is_uppercase() {
        CharClass::Upper
    } else if c.is_alphabetic() {
        // Caseless scripts (Devanagari etc.) group with lowercase.
        CharClass::Lower
    } else {
        CharClass::Other
    }
}

/// Splits a hashtag body into maximal runs of, in order of preference:
/// uppercase not followed by lowercase (`HTML` in `HTMLParser`), one
/// uppercase plus lowercase (`Parser`), lowercase, digits. Anything else
/// (underscores) separates segments and is dropped.
pub fn segment_hashtag(body: &str) -> Vec<String> {
    let chars: Vec<char> = body.chars().collect();
    let classes: Vec<CharClass> = chars.iter().map(|&c| classify(c)).collect();
    let run_end = |from: usize, class: CharClass| {
        let mut end = from;
        while end < classes.len() && classes[end] == class {
            end += 1;
        }
        end
    };

    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let end = match classes[i] {
            CharClass::Other => {
                i += 1;
                continue;
            }
            CharClass::Upper => {
                let upper_end = run_end(i, CharClass::Upper);
                let next_is_lower = classes.get(upper_end) == Some(&CharClass::Lower);
                if !next_is_lower {
                    upper_end
                } else if upper_end - i > 1 {
                    // Leave the last capital to start the next word.
                    upper_end - 1
                } else {
                    run_end(upper_end, CharClass::Lower)
                }
            }
            class => run_end(i, class),
        };
        out.push(chars[i..end].iter().collect());
        i = end;
    }
    out
}

/// Replaces each punctuation or symbol character (Unicode P* and S*) with a
/// space.
pub fn strip_punctuation(text: &str) -> String {
    PUNCT_OR_SYMBOL.replace_all(text, " ").into_owned()
}

pub fn contract_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Full cleaning pipeline over raw text.
pub fn clean_text(text: &str) -> Vec<String> {
    let text = strip_urls(text);
    let text = strip_mentions(&text);
    let text = extract_hashtag_words(&text);
    let text = strip_punctuation(&text);
    let text = contract_whitespace(&text).to_lowercase();
    text.split_whitespace().map(str::to_string).collect()
}

/// Cleans a corpus instance. Tokens of every language tag, `O` included, are
/// joined and cleaned together.
pub fn clean(instance: &CodeMixedInstance) -> CleanDocument {
    CleanDocument::new(instance.uid.clone(), clean_text(&instance.text()))
}
