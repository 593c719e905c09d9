use serde::{Deserialize, Serialize};

use crate::svr::KernelPoint;

pub const AUX_LEN: usize = 12;

/// Column names of the auxiliary block, in layout order.
pub const AUX_NAMES: [&str; AUX_LEN] = [
    "humor_label",
    "humor_score",
    "hate",
    "offensive",
    "senti_min",
    "senti_max",
    "senti_mean",
    "senti_sum",
    "pos_count",
    "neg_count",
    "easy_ratio",
    "difficult_ratio",
];

/// One document's features: a sparse TF-IDF block of width `tfidf_dim`,
/// then the pooled embedding, then the fixed auxiliary block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// `(column, weight)` pairs sorted by column, L2 norm 1 or empty.
    pub tfidf: Vec<(usize, f64)>,
    pub tfidf_dim: usize,
    pub embedding: Vec<f64>,
    pub aux: [f64; AUX_LEN],
}

impl FeatureVector {
    pub fn total_dim(&self) -> usize {
        self.tfidf_dim + self.embedding.len() + AUX_LEN
    }

    /// Expands to a dense vector in canonical column order.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.tfidf_dim];
        for &(c, w) in &self.tfidf {
            out[c] = w;
        }
        out.extend_from_slice(&self.embedding);
        out.extend_from_slice(&self.aux);
        out
    }

    pub fn tfidf_norm(&self) -> f64 {
        self.tfidf.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }
}

fn dense_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dense_sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

fn sparse_sq_dist(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() || j < b.len() {
        let d = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x.0 == y.0 => {
                i += 1;
                j += 1;
                x.1 - y.1
            }
            (Some(x), Some(y)) if x.0 < y.0 => {
                i += 1;
                x.1
            }
            (Some(x), None) => {
                i += 1;
                x.1
            }
            (_, Some(y)) => {
                j += 1;
                y.1
            }
            (None, None) => unreachable!(),
        };
        acc += d * d;
    }
    acc
}

impl KernelPoint for FeatureVector {
    fn dim(&self) -> usize {
        self.total_dim()
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.tfidf_dim == other.tfidf_dim && self.embedding.len() == other.embedding.len()
    }

    fn dot(&self, other: &Self) -> f64 {
        sparse_dot(&self.tfidf, &other.tfidf)
            + dense_dot(&self.embedding, &other.embedding)
            + dense_dot(&self.aux, &other.aux)
    }

    fn squared_distance(&self, other: &Self) -> f64 {
        sparse_sq_dist(&self.tfidf, &other.tfidf)
            + dense_sq_dist(&self.embedding, &other.embedding)
            + dense_sq_dist(&self.aux, &other.aux)
    }

    fn is_finite(&self) -> bool {
        self.tfidf.iter().all(|(_, w)| w.is_finite())
            && self.embedding.iter().all(|x| x.is_finite())
            && self.aux.iter().all(|x| x.is_finite())
    }
}
