use crate::corpus::SentimentLabel;

use super::SvrError;

/// Regression target for a class: -1, 0 or +1.
pub fn encode_label(label: SentimentLabel) -> f64 {
    match label {
        SentimentLabel::Negative => -1.0,
        SentimentLabel::Neutral => 0.0,
        SentimentLabel::Positive => 1.0,
    }
}

/// Nearest class to a regression output. Exact midpoints go to neutral.
pub fn decode_label(v: f64) -> Result<SentimentLabel, SvrError> {
    if !v.is_finite() {
        return Err(SvrError::NonFinite(format!("prediction {v}")));
    }
    Ok(if v < -0.5 {
        SentimentLabel::Negative
    } else if v > 0.5 {
        SentimentLabel::Positive
    } else {
        SentimentLabel::Neutral
    })
}
