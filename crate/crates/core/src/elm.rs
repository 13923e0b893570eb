//! Extreme learning machine with a single output neuron.
//!
//! The hidden layer `sigmoid(W_in x + b)` is drawn once and never trained.
//! Output weights solve the weighted ridge problem
//! `min_β Σ w_i (H_i·β − t_i)² + μ‖β‖²` through its normal equations.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{serde_rows, serde_vec, sigmoid};
use crate::rng::Stream;

pub const DEFAULT_HIDDEN: usize = 1000;
pub const DEFAULT_RIDGE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum ElmError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("normal equations are singular; use a ridge term mu > 0")]
    Singular,
    #[error("normal equations could not be factorized (mu = {0})")]
    Factorization(f64),
    #[error("no training samples")]
    Empty,
    #[error("sample weights must be positive and finite")]
    BadWeights,
    #[error("class weighting needs both classes, found only class {0}")]
    SingleClass(u8),
    #[error("labels must be 0 or 1, found {0}")]
    BadLabel(u8),
    #[error("model has not been fitted")]
    Unfitted,
    #[error("ridge must be finite and >= 0, got {0}")]
    BadRidge(f64),
    #[error("non-finite input")]
    NonFinite,
}

/// Per-sample positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleWeights(Vec<f64>);

impl SampleWeights {
    pub fn new(w: Vec<f64>) -> Result<Self, ElmError> {
        if w.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(Self(w))
        } else {
            Err(ElmError::BadWeights)
        }
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElmModel {
    /// Input weights, `n_hidden × d_in`, Uniform[−1, 1].
    #[serde(with = "serde_rows")]
    pub w_in: DMatrix<f64>,
    /// Hidden biases, Uniform[0, 1].
    #[serde(with = "serde_vec")]
    pub bias: DVector<f64>,
    #[serde(with = "serde_vec")]
    pub beta: DVector<f64>,
    pub ridge: f64,
    pub fitted: bool,
}

impl ElmModel {
    pub fn n_hidden(&self) -> usize {
        self.w_in.nrows()
    }

    pub fn d_in(&self) -> usize {
        self.w_in.ncols()
    }

    /// Install output weights directly.
    pub fn with_beta(mut self, beta: DVector<f64>) -> Result<Self, ElmError> {
        if beta.len() != self.n_hidden() {
            return Err(ElmError::Dimension {
                expected: self.n_hidden(),
                got: beta.len(),
            });
        }
        self.beta = beta;
        self.fitted = true;
        Ok(self)
    }

    pub fn check_shapes(&self) -> Result<(), ElmError> {
        for (expected, got) in [
            (self.n_hidden(), self.bias.len()),
            (self.n_hidden(), self.beta.len()),
        ] {
            if expected != got {
                return Err(ElmError::Dimension { expected, got });
            }
        }
        Ok(())
    }

    /// Fit output weights on the rows of `x`, leaving the hidden layer
    /// untouched.
    pub fn fit(
        &mut self,
        x: &DMatrix<f64>,
        targets: &[f64],
        weights: &SampleWeights,
    ) -> Result<(), ElmError> {
        let h = hidden_matrix(x, self)?;
        self.beta = fit_output_weights(&h, targets, weights, self.ridge)?;
        self.fitted = true;
        Ok(())
    }
}

/// Draw a fresh, unfitted model.
pub fn init_elm(d_in: usize, n_hidden: usize, ridge: f64, rng: &mut Stream) -> ElmModel {
    let w_in = DMatrix::from_fn(n_hidden, d_in, |_, _| 2.0 * rng.random::<f64>() - 1.0);
    let bias = DVector::from_fn(n_hidden, |_, _| rng.random::<f64>());
    ElmModel {
        w_in,
        bias,
        beta: DVector::zeros(n_hidden),
        ridge,
        fitted: false,
    }
}

/// `H[i][j] = sigmoid(W_in[j]·x_i + b[j])`, one row per sample.
pub fn hidden_matrix(x: &DMatrix<f64>, model: &ElmModel) -> Result<DMatrix<f64>, ElmError> {
    if x.nrows() == 0 {
        return Ok(DMatrix::zeros(0, model.n_hidden()));
    }
    if x.ncols() != model.d_in() {
        return Err(ElmError::Dimension {
            expected: model.d_in(),
            got: x.ncols(),
        });
    }
    let mut h = x * model.w_in.transpose();
    for mut row in h.row_iter_mut() {
        row += model.bias.transpose();
    }
    h.apply(|v| *v = sigmoid(*v));
    Ok(h)
}

/// Solve `(Hᵀ Ω H + μ I) β = Hᵀ Ω t` by Cholesky.
pub fn fit_output_weights(
    h: &DMatrix<f64>,
    targets: &[f64],
    weights: &SampleWeights,
    ridge: f64,
) -> Result<DVector<f64>, ElmError> {
    let n = h.nrows();
    if n == 0 {
        return Err(ElmError::Empty);
    }
    for got in [targets.len(), weights.len()] {
        if got != n {
            return Err(ElmError::Dimension { expected: n, got });
        }
    }
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(ElmError::BadRidge(ridge));
    }
    if targets.iter().any(|t| !t.is_finite()) || h.iter().any(|v| !v.is_finite()) {
        return Err(ElmError::NonFinite);
    }
    let w = weights.as_slice();
    let mut scaled = h.clone();
    for (mut row, wi) in scaled.row_iter_mut().zip(w) {
        row *= wi.sqrt();
    }
    // Explicit transpose keeps the product on the blocked GEMM path.
    let scaled_t = scaled.transpose();
    let mut gram = &scaled_t * &scaled;
    for i in 0..gram.nrows() {
        gram[(i, i)] += ridge;
    }
    let weighted_targets = DVector::from_iterator(n, targets.iter().zip(w).map(|(t, wi)| t * wi));
    let rhs = h.transpose() * weighted_targets;

    let max_diag = gram.diagonal().amax();
    let chol = match gram.cholesky() {
        Some(c) => c,
        None if ridge == 0.0 => return Err(ElmError::Singular),
        None => return Err(ElmError::Factorization(ridge)),
    };
    if ridge == 0.0 {
        let min_pivot = chol.l_dirty().diagonal().iter().fold(f64::INFINITY, |a, v| a.min(v * v));
        if min_pivot <= 1e-13 * max_diag.max(f64::MIN_POSITIVE) {
            return Err(ElmError::Singular);
        }
    }
    Ok(chol.solve(&rhs))
}

/// Weighted ridge objective `Σ w_i (H_i·β − t_i)² + μ‖β‖²`.
pub fn ridge_objective(
    h: &DMatrix<f64>,
    targets: &[f64],
    weights: &SampleWeights,
    ridge: f64,
    beta: &DVector<f64>,
) -> f64 {
    let pred = h * beta;
    let fit: f64 = pred
        .iter()
        .zip(targets)
        .zip(weights.as_slice())
        .map(|((p, t), w)| w * (p - t).powi(2))
        .sum();
    fit + ridge * beta.norm_squared()
}

/// `w_i = N / (2·N_class(i))`: each class carries total weight `N/2`.
pub fn class_weights(labels: &[u8]) -> Result<SampleWeights, ElmError> {
    if let Some(&bad) = labels.iter().find(|l| **l > 1) {
        return Err(ElmError::BadLabel(bad));
    }
    let n = labels.len();
    let pos = labels.iter().filter(|l| **l == 1).count();
    let neg = n - pos;
    if n == 0 {
        return Err(ElmError::Empty);
    }
    if pos == 0 || neg == 0 {
        return Err(ElmError::SingleClass(if pos == 0 { 0 } else { 1 }));
    }
    let half = n as f64 / 2.0;
    let (w_pos, w_neg) = (half / pos as f64, half / neg as f64);
    Ok(SampleWeights(
        labels
            .iter()
            .map(|l| if *l == 1 { w_pos } else { w_neg })
            .collect(),
    ))
}

/// Unclamped network output `hidden(x)·β` for every row of `x`.
pub fn raw_scores(x: &DMatrix<f64>, model: &ElmModel) -> Result<Vec<f64>, ElmError> {
    if !model.fitted {
        return Err(ElmError::Unfitted);
    }
    let h = hidden_matrix(x, model)?;
    Ok((h * &model.beta).iter().copied().collect())
}

/// Anomaly score `clamp(hidden(x)·β, 0, 1)`.
pub fn score(x: &[f64], model: &ElmModel) -> Result<f64, ElmError> {
    let m = DMatrix::from_row_slice(1, x.len(), x);
    Ok(raw_scores(&m, model)?[0].clamp(0.0, 1.0))
}

pub fn score_batch(x: &DMatrix<f64>, model: &ElmModel) -> Result<Vec<f64>, ElmError> {
    Ok(raw_scores(x, model)?
        .into_iter()
        .map(|v| v.clamp(0.0, 1.0))
        .collect())
}
