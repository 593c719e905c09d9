//! Precision, recall and F1 per sentiment class, with macro averages.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SentimentLabel;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("{gold} gold labels but {pred} predictions")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("nothing to evaluate")]
    Empty,
}

/// Counts indexed `[gold][predicted]` in [`SentimentLabel::ALL`] order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sum(&self, gold: usize) -> u64 {
        self.counts[gold].iter().sum()
    }

    pub fn col_sum(&self, pred: usize) -> u64 {
        self.counts.iter().map(|r| r[pred]).sum()
    }
}

pub fn confusion(gold: &[SentimentLabel], pred: &[SentimentLabel]) -> Result<ConfusionMatrix, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut m = ConfusionMatrix::default();
    for (g, p) in gold.iter().zip(pred) {
        m.counts[g.index()][p.index()] += 1;
    }
    Ok(m)
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: SentimentLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Negative, neutral, positive.
    pub per_class: [ClassMetrics; 3],
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub total_support: u64,
    /// Set when some precision or recall had a zero denominator and was
    /// scored as 0.
    pub zero_division: bool,
}

impl EvalReport {
    /// Builds a report from per-class `(precision, recall, support)`, in
    /// [`SentimentLabel::ALL`] order.
    pub fn from_per_class(values: [(f64, f64, u64); 3]) -> Self {
        let per_class = std::array::from_fn(|i| {
            let (precision, recall, support) = values[i];
            ClassMetrics {
                label: SentimentLabel::ALL[i],
                precision,
                recall,
                f1: f1_score(precision, recall),
                support,
            }
        });
        Self::with_classes(per_class, false)
    }

    fn with_classes(per_class: [ClassMetrics; 3], zero_division: bool) -> Self {
        let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / 3.0;
        Self {
            macro_precision: mean(|c| c.precision),
            macro_recall: mean(|c| c.recall),
            macro_f1: mean(|c| c.f1),
            total_support: per_class.iter().map(|c| c.support).sum(),
            per_class,
            zero_division,
        }
    }

    pub fn class(&self, label: SentimentLabel) -> &ClassMetrics {
        &self.per_class[label.index()]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are always serializable")
    }
}

pub fn report(matrix: &ConfusionMatrix) -> EvalReport {
    let ratio = |num: u64, den: u64| if den == 0 { None } else { Some(num as f64 / den as f64) };
    let mut zero_division = false;
    let per_class = std::array::from_fn(|c| {
        let tp = matrix.counts[c][c];
        let support = matrix.row_sum(c);
        let precision = ratio(tp, matrix.col_sum(c));
        let recall = ratio(tp, support);
        zero_division |= precision.is_none() || recall.is_none();
        let (precision, recall) = (precision.unwrap_or(0.0), recall.unwrap_or(0.0));
        ClassMetrics {
            label: SentimentLabel::ALL[c],
            precision,
            recall,
            f1: f1_score(precision, recall),
            support,
        }
    });
    if zero_division {
        log::warn!("some precision or recall is undefined (empty class); scored as 0");
    }
    EvalReport::with_classes(per_class, zero_division)
}

/// Macro-averaged F1 of predictions against gold labels.
pub fn macro_f1(gold: &[SentimentLabel], pred: &[SentimentLabel]) -> Result<f64, EvalError> {
    Ok(report(&confusion(gold, pred)?).macro_f1)
}

/// Plain-text table: one row per class, then the macro average. Scores have
/// two decimals except the macro F1, which has three.
pub fn format_report(r: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<12}{:>10}{:>10}{:>10}{:>10}", "", "Precision", "Recall", "F1-score", "Support");
    for c in &r.per_class {
        let _ = writeln!(
            out,
            "{:<12}{:>10.2}{:>10.2}{:>10.2}{:>10}",
            c.label.as_str(),
            c.precision,
            c.recall,
            c.f1,
            c.support
        );
    }
    let _ = writeln!(
        out,
        "{:<12}{:>10.2}{:>10.2}{:>10.3}{:>10}",
        "Macro avg.", r.macro_precision, r.macro_recall, r.macro_f1, r.total_support
    );
    out
}
