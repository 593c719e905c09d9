//! Epsilon-insensitive support vector regression.
//!
//! [`SvrModel::fit`] solves the dual
//!
//! ```text
//! max  -1/2 sum_ij b_i b_j K(x_i, x_j) - eps sum_i |b_i| + sum_i y_i b_i
//! s.t. sum_i b_i = 0,  |b_i| <= C
//! ```
//!
//! with a two-variable SMO solver, and predicts `sum_i b_i K(x_i, x) + bias`.
//! Sentiment classes ride on the regression through [`encode_label`] /
//! [`decode_label`].

mod cache;
mod codec;
mod kernel;
mod persist;
mod solver;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use codec::{decode_label, encode_label};
pub use kernel::{kernel_eval, Kernel, KernelPoint};
pub use persist::{load_model, read_model, save_model, write_model, ModelFileError, MODEL_FORMAT_VERSION};
pub use solver::UNBOUNDED_ITER_CAP;
pub(crate) use persist::write_atomic;

use crate::features::FeatureVector;

/// Dual coefficients at or below this magnitude are not support vectors.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SvrError {
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("{points} points but {targets} targets")]
    LengthMismatch { points: usize, targets: usize },
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Linear => "linear",
            Self::Rbf => "rbf",
        })
    }
}

impl FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Self::Linear),
            "rbf" => Ok(Self::Rbf),
            other => Err(format!("unknown kernel `{other}` (expected linear or rbf)")),
        }
    }
}

/// SVR settings. `coef0` is carried along for completeness but neither the
/// linear nor the RBF kernel reads it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrHyperParams {
    pub c: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub kernel: KernelKind,
    /// Stop once the maximal KKT violation is at most this.
    pub tol: f64,
    pub cache_size_mb: usize,
    pub coef0: f64,
    /// Working-set update limit; negative means [`UNBOUNDED_ITER_CAP`].
    pub max_iter: i64,
    pub shrinking: bool,
}

impl Default for SvrHyperParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            epsilon: 0.1,
            gamma: 0.1,
            kernel: KernelKind::Rbf,
            tol: 1e-3,
            cache_size_mb: 200,
            coef0: 0.1,
            max_iter: -1,
            shrinking: true,
        }
    }
}

impl SvrHyperParams {
    pub fn validate(&self) -> Result<(), SvrError> {
        let bad = |what: String| Err(SvrError::InvalidParams(what));
        if !(self.c.is_finite() && self.c > 0.0) {
            return bad(format!("C must be a positive real, got {}", self.c));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return bad(format!("epsilon must be non-negative, got {}", self.epsilon));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return bad(format!("gamma must be a positive real, got {}", self.gamma));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad(format!("tol must be a positive real, got {}", self.tol));
        }
        if self.cache_size_mb == 0 {
            return bad("cache_size_mb must be positive".into());
        }
        if !self.coef0.is_finite() {
            return bad("coef0 must be finite".into());
        }
        Ok(())
    }
}

/// A fitted epsilon-SVR.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel<P = FeatureVector> {
    pub params: SvrHyperParams,
    pub support_vectors: Vec<P>,
    /// Training-set position of each support vector.
    pub support_indices: Vec<usize>,
    /// `alpha_i - alpha*_i` for each support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub input_dim: usize,
    pub n_iterations: u64,
    /// False when the iteration cap stopped the solver first.
    pub converged: bool,
}

impl<P: KernelPoint + Clone> SvrModel<P> {
    pub fn fit(params: &SvrHyperParams, x: &[P], y: &[f64]) -> Result<Self, SvrError> {
        params.validate()?;
        let first = x.first().ok_or(SvrError::EmptyTrainingSet)?;
        if x.len() != y.len() {
            return Err(SvrError::LengthMismatch {
                points: x.len(),
                targets: y.len(),
            });
        }
        if let Some(bad) = x.iter().find(|p| !p.same_shape(first)) {
            return Err(SvrError::DimensionMismatch {
                expected: first.dim(),
                found: bad.dim(),
            });
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(SvrError::NonFinite(format!("target {i}")));
        }
        if let Some(i) = x.iter().position(|p| !p.is_finite()) {
            return Err(SvrError::NonFinite(format!("training point {i}")));
        }

        let sol = solver::solve(x, y, params);
        let mut model = Self {
            params: *params,
            support_vectors: Vec::new(),
            support_indices: Vec::new(),
            dual_coef: Vec::new(),
            bias: sol.bias,
            input_dim: first.dim(),
            n_iterations: sol.iterations,
            converged: sol.converged,
        };
        for (i, &b) in sol.beta.iter().enumerate() {
            if b.abs() > SUPPORT_THRESHOLD {
                model.support_vectors.push(x[i].clone());
                model.support_indices.push(i);
                model.dual_coef.push(b);
            }
        }
        if !model.converged {
            log::warn!(
                "SVR stopped after {} updates without reaching tol={}",
                model.n_iterations,
                params.tol
            );
        }
        Ok(model)
    }

    /// A model with no support vectors that predicts `bias` everywhere.
    pub fn constant(params: SvrHyperParams, input_dim: usize, bias: f64) -> Self {
        Self {
            params,
            support_vectors: Vec::new(),
            support_indices: Vec::new(),
            dual_coef: Vec::new(),
            bias,
            input_dim,
            n_iterations: 0,
            converged: true,
        }
    }

    pub fn predict(&self, x: &P) -> Result<f64, SvrError> {
        let shape_ok = match self.support_vectors.first() {
            Some(sv) => sv.same_shape(x),
            None => x.dim() == self.input_dim,
        };
        if !shape_ok {
            return Err(SvrError::DimensionMismatch {
                expected: self.input_dim,
                found: x.dim(),
            });
        }
        let kernel = Kernel::from_params(&self.params);
        let sum: f64 = self
            .support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, b)| b * kernel.eval(sv, x))
            .sum();
        Ok(sum + self.bias)
    }

    pub fn predict_many(&self, xs: &[P]) -> Result<Vec<f64>, SvrError> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    /// Full-length coefficient vector over a training set of size `n`.
    pub fn dense_coefficients(&self, n: usize) -> Vec<f64> {
        let mut beta = vec![0.0; n];
        for (&i, &b) in self.support_indices.iter().zip(&self.dual_coef) {
            beta[i] = b;
        }
        beta
    }
}

/// Value of the dual objective at coefficients `beta`.
pub fn dual_objective<P: KernelPoint>(kernel: Kernel, x: &[P], y: &[f64], beta: &[f64], epsilon: f64) -> f64 {
    let mut quad = 0.0;
    for (i, xi) in x.iter().enumerate() {
        if beta[i] == 0.0 {
            continue;
        }
        for (j, xj) in x.iter().enumerate() {
            quad += beta[i] * beta[j] * kernel.eval(xi, xj);
        }
    }
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    let lin: f64 = y.iter().zip(beta).map(|(y, b)| y * b).sum();
    -0.5 * quad - epsilon * l1 + lin
}
