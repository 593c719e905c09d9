use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::FeatureError;
use crate::preprocess::CleanDocument;

pub const DEFAULT_DIFFICULT_SYLLABLES: usize = 3;

/// A word is difficult when it is not on the easy list and has at least
/// `difficult_syllable_threshold` syllables.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadabilityConfig {
    easy_words: HashSet<String>,
    difficult_syllable_threshold: usize,
}

impl ReadabilityConfig {
    pub fn new(easy_words: HashSet<String>, difficult_syllable_threshold: usize) -> Result<Self, FeatureError> {
        if difficult_syllable_threshold < 1 {
            return Err(FeatureError::InvalidConfig(
                "difficult-word syllable threshold must be at least 1".into(),
            ));
        }
        Ok(Self {
            easy_words,
            difficult_syllable_threshold,
        })
    }

    pub fn threshold(&self) -> usize {
        self.difficult_syllable_threshold
    }

    pub fn is_easy(&self, word: &str) -> bool {
        self.easy_words.contains(word)
    }

    pub fn easy_word_count(&self) -> usize {
        self.easy_words.len()
    }
}

impl Default for ReadabilityConfig {
    fn default() -> Self {
        Self {
            easy_words: HashSet::new(),
            difficult_syllable_threshold: DEFAULT_DIFFICULT_SYLLABLES,
        }
    }
}

/// One word per line; blank lines skipped, entries lowercased.
pub fn parse_easy_words(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn load_easy_words(path: &Path) -> Result<HashSet<String>, FeatureError> {
    let text = fs::read_to_string(path).map_err(|source| FeatureError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_easy_words(&text))
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel-group heuristic: one syllable per maximal run of `[aeiouy]`, less
/// one for a silent final `e` after a consonant, never below one.
pub fn count_syllables(word: &str) -> usize {
    let chars: Vec<char> = word.chars().collect();
    let mut runs = 0;
    let mut in_run = false;
    for &c in &chars {
        let v = is_vowel(c);
        if v && !in_run {
            runs += 1;
        }
        in_run = v;
    }
    let silent_e = matches!(chars.as_slice(), [.., prev, 'e'] if prev.is_alphabetic() && !is_vowel(*prev));
    if silent_e && runs > 1 {
        runs -= 1;
    }
    runs.max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReadabilityCounts {
    pub easy: usize,
    pub difficult: usize,
    pub easy_ratio: f64,
    pub difficult_ratio: f64,
}

pub fn readability_counts(config: &ReadabilityConfig, doc: &CleanDocument) -> ReadabilityCounts {
    if doc.is_empty() {
        return ReadabilityCounts::default();
    }
    let difficult = doc
        .words
        .iter()
        .filter(|w| !config.is_easy(w) && count_syllables(w) >= config.threshold())
        .count();
    let n = doc.len();
    let easy = n - difficult;
    ReadabilityCounts {
        easy,
        difficult,
        easy_ratio: easy as f64 / n as f64,
        difficult_ratio: difficult as f64 / n as f64,
    }
}
