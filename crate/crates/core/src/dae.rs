//! Single denoising autoencoder.
//!
//! Encoder `h = sigmoid(W x̃ + b_h)`, decoder `y = s_g(W' h + b_y)` with
//! untied weights. Training minimizes the reconstruction loss between the
//! *clean* input and the reconstruction of its corrupted copy, plus
//! `λ (‖W‖²_F + ‖W'‖²_F)`, by mini-batch SGD with heavy-ball momentum.

use nalgebra::{DMatrix, DVector};
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{matrix_from_columns, serde_rows, serde_vec, sigmoid};
use crate::rng::Stream;

/// Clamp applied to sigmoid outputs inside the cross-entropy loss.
pub const CE_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum DaeError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid DAE config: {0}")]
    InvalidConfig(String),
    #[error("training data is empty")]
    EmptyData,
    #[error("training sample {index} is invalid: {reason}")]
    BadSample { index: usize, reason: String },
    #[error("divergence: non-finite loss at epoch {epoch}")]
    Divergence { epoch: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderActivation {
    Linear,
    Sigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Squared,
    CrossEntropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Corruption {
    /// Additive isotropic noise `N(0, σ²I)`.
    Gaussian { sigma: f64 },
    /// Exactly `round(rate·d)` coordinates, chosen without replacement, set
    /// to 0.
    Masking { rate: f64 },
    /// Exactly `round(rate·d)` coordinates set to `min` or `max` by a fair
    /// coin each.
    SaltPepper { rate: f64, min: f64, max: f64 },
}

impl Corruption {
    fn validate(&self) -> Result<(), String> {
        match *self {
            Corruption::Gaussian { sigma } if !(sigma.is_finite() && sigma >= 0.0) => {
                Err(format!("gaussian sigma must be >= 0, got {sigma}"))
            }
            Corruption::Masking { rate } | Corruption::SaltPepper { rate, .. }
                if !(0.0..=1.0).contains(&rate) =>
            {
                Err(format!("corruption rate must be in [0, 1], got {rate}"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaeConfig {
    pub d_x: usize,
    pub d_h: usize,
    pub decoder: DecoderActivation,
    pub loss: LossKind,
    pub corruption: Corruption,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub weight_decay: f64,
}

impl DaeConfig {
    /// Defaults for thermocouple profiles: sigmoid decoder, squared loss,
    /// masking at rate 0.2, lr 0.02, momentum 0.5, 200 epochs, batch 32.
    pub fn new(d_x: usize, d_h: usize) -> Self {
        Self {
            d_x,
            d_h,
            decoder: DecoderActivation::Sigmoid,
            loss: LossKind::Squared,
            corruption: Corruption::Masking { rate: 0.2 },
            learning_rate: 0.02,
            momentum: 0.5,
            epochs: 200,
            batch_size: 32,
            weight_decay: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), DaeError> {
        let bad = |m: String| Err(DaeError::InvalidConfig(m));
        if self.d_x == 0 || self.d_h == 0 {
            return bad("dimensions must be positive".into());
        }
        if self.loss == LossKind::CrossEntropy && self.decoder != DecoderActivation::Sigmoid {
            return bad("cross-entropy loss requires a sigmoid decoder".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum must be in [0, 1), got {}", self.momentum));
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return bad(format!("weight_decay must be >= 0, got {}", self.weight_decay));
        }
        self.corruption.validate().map_err(DaeError::InvalidConfig)
    }
}

/// Weights and biases of one autoencoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaeParams {
    /// Encoder weights, `d_h × d_x`.
    #[serde(with = "serde_rows")]
    pub w: DMatrix<f64>,
    #[serde(with = "serde_vec")]
    pub b_h: DVector<f64>,
    /// Decoder weights, `d_x × d_h`.
    #[serde(with = "serde_rows")]
    pub w_prime: DMatrix<f64>,
    #[serde(with = "serde_vec")]
    pub b_y: DVector<f64>,
}

impl DaeParams {
    pub fn new(
        w: DMatrix<f64>,
        b_h: DVector<f64>,
        w_prime: DMatrix<f64>,
        b_y: DVector<f64>,
    ) -> Result<Self, DaeError> {
        let p = Self { w, b_h, w_prime, b_y };
        p.check_shapes()?;
        Ok(p)
    }

    pub fn zeros(d_x: usize, d_h: usize) -> Self {
        Self {
            w: DMatrix::zeros(d_h, d_x),
            b_h: DVector::zeros(d_h),
            w_prime: DMatrix::zeros(d_x, d_h),
            b_y: DVector::zeros(d_x),
        }
    }

    /// Uniform fan-based initialization, ±√(6/(d_x+d_h)), times 4 for
    /// sigmoid layers. Biases start at zero.
    pub fn init(d_x: usize, d_h: usize, decoder: DecoderActivation, rng: &mut Stream) -> Self {
        let r = (6.0 / (d_x + d_h) as f64).sqrt();
        let enc = 4.0 * r;
        let dec = match decoder {
            DecoderActivation::Sigmoid => 4.0 * r,
            DecoderActivation::Linear => r,
        };
        let w = DMatrix::from_fn(d_h, d_x, |_, _| enc * (2.0 * rng.random::<f64>() - 1.0));
        let w_prime = DMatrix::from_fn(d_x, d_h, |_, _| dec * (2.0 * rng.random::<f64>() - 1.0));
        Self {
            w,
            b_h: DVector::zeros(d_h),
            w_prime,
            b_y: DVector::zeros(d_x),
        }
    }

    pub fn d_x(&self) -> usize {
        self.w.ncols()
    }

    pub fn d_h(&self) -> usize {
        self.w.nrows()
    }

    pub fn check_shapes(&self) -> Result<(), DaeError> {
        let (d_h, d_x) = self.w.shape();
        let checks = [
            (d_h, self.b_h.len()),
            (d_x, self.w_prime.nrows()),
            (d_h, self.w_prime.ncols()),
            (d_x, self.b_y.len()),
        ];
        for (expected, got) in checks {
            if expected != got {
                return Err(DaeError::Dimension { expected, got });
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().all(|v| v.is_finite())
            && self.b_h.iter().all(|v| v.is_finite())
            && self.w_prime.iter().all(|v| v.is_finite())
            && self.b_y.iter().all(|v| v.is_finite())
    }
}

/// Gradient of the per-example objective, same layout as [`DaeParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct DaeGradients {
    pub w: DMatrix<f64>,
    pub b_h: DVector<f64>,
    pub w_prime: DMatrix<f64>,
    pub b_y: DVector<f64>,
}

fn check_len(expected: usize, got: usize) -> Result<(), DaeError> {
    if expected == got {
        Ok(())
    } else {
        Err(DaeError::Dimension { expected, got })
    }
}

/// `sigmoid(W x + b_h)`.
pub fn encode(x: &[f64], params: &DaeParams) -> Result<Vec<f64>, DaeError> {
    check_len(params.d_x(), x.len())?;
    Ok(encode_raw(&params.w, &params.b_h, x))
}

pub(crate) fn encode_raw(w: &DMatrix<f64>, b: &DVector<f64>, x: &[f64]) -> Vec<f64> {
    let x = DVector::from_column_slice(x);
    (w * x + b).iter().map(|a| sigmoid(*a)).collect()
}

/// `s_g(W' h + b_y)`.
pub fn decode(
    h: &[f64],
    params: &DaeParams,
    activation: DecoderActivation,
) -> Result<Vec<f64>, DaeError> {
    check_len(params.d_h(), h.len())?;
    let h = DVector::from_column_slice(h);
    let a = &params.w_prime * h + &params.b_y;
    Ok(match activation {
        DecoderActivation::Linear => a.iter().copied().collect(),
        DecoderActivation::Sigmoid => a.iter().map(|v| sigmoid(*v)).collect(),
    })
}

/// Squared error `Σ(x−y)²` or cross-entropy
/// `−Σ[x ln y + (1−x) ln(1−y)]` with `y` clamped to `[ε, 1−ε]`.
pub fn reconstruction_loss(x: &[f64], y: &[f64], kind: LossKind) -> f64 {
    match kind {
        LossKind::Squared => x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum(),
        LossKind::CrossEntropy => x
            .iter()
            .zip(y)
            .map(|(&xi, &yi)| {
                let yi = yi.clamp(CE_EPS, 1.0 - CE_EPS);
                -(xi * yi.ln() + (1.0 - xi) * (1.0 - yi).ln())
            })
            .sum(),
    }
}

pub fn corrupt(x: &[f64], corruption: &Corruption, rng: &mut Stream) -> Vec<f64> {
    let mut out = x.to_vec();
    let d = x.len();
    match *corruption {
        Corruption::Gaussian { sigma } => {
            if sigma > 0.0 {
                let noise = Normal::new(0.0, sigma).expect("validated sigma");
                for v in out.iter_mut() {
                    *v += noise.sample(rng);
                }
            }
        }
        Corruption::Masking { rate } => {
            for i in index::sample(rng, d, corrupted_count(rate, d)) {
                out[i] = 0.0;
            }
        }
        Corruption::SaltPepper { rate, min, max } => {
            for i in index::sample(rng, d, corrupted_count(rate, d)) {
                out[i] = if rng.random::<bool>() { max } else { min };
            }
        }
    }
    out
}

/// `round(rate·d)`, halves rounded away from zero.
pub fn corrupted_count(rate: f64, d: usize) -> usize {
    ((rate * d as f64).round() as usize).min(d)
}

struct Forward {
    hidden: DMatrix<f64>,
    output: DMatrix<f64>,
}

fn forward(p: &DaeParams, x: &DMatrix<f64>, decoder: DecoderActivation) -> Forward {
    let mut hidden = &p.w * x;
    for mut col in hidden.column_iter_mut() {
        col += &p.b_h;
    }
    hidden.apply(|v| *v = sigmoid(*v));
    let mut output = &p.w_prime * &hidden;
    for mut col in output.column_iter_mut() {
        col += &p.b_y;
    }
    if decoder == DecoderActivation::Sigmoid {
        output.apply(|v| *v = sigmoid(*v));
    }
    Forward { hidden, output }
}

/// Mean gradient over a batch (columns are samples) of the per-example
/// objective, including the decay term once.
fn batch_gradients(
    p: &DaeParams,
    clean: &DMatrix<f64>,
    noisy: &DMatrix<f64>,
    cfg: &DaeConfig,
) -> DaeGradients {
    let batch = clean.ncols() as f64;
    let fw = forward(p, noisy, cfg.decoder);
    let y = &fw.output;
    let h = &fw.hidden;

    // dL/d(decoder pre-activation)
    let mut delta_out = y - clean;
    match (cfg.loss, cfg.decoder) {
        (LossKind::Squared, DecoderActivation::Linear) => delta_out *= 2.0,
        (LossKind::Squared, DecoderActivation::Sigmoid) => {
            delta_out.zip_apply(y, |d, yv| *d *= 2.0 * yv * (1.0 - yv));
        }
        (LossKind::CrossEntropy, _) => {}
    }
    let mut delta_hidden = p.w_prime.transpose() * &delta_out;
    delta_hidden.zip_apply(h, |d, hv| *d *= hv * (1.0 - hv));

    let scale = 1.0 / batch;
    let decay = 2.0 * cfg.weight_decay;
    let mut g_w = &delta_hidden * noisy.transpose() * scale;
    let mut g_wp = &delta_out * h.transpose() * scale;
    if decay > 0.0 {
        g_w += &p.w * decay;
        g_wp += &p.w_prime * decay;
    }
    DaeGradients {
        w: g_w,
        b_h: delta_hidden.column_sum() * scale,
        w_prime: g_wp,
        b_y: delta_out.column_sum() * scale,
    }
}

/// Exact gradient of `L(x_clean, g(f(x̃))) + λ(‖W‖²_F + ‖W'‖²_F)`.
pub fn gradients(
    x_clean: &[f64],
    x_tilde: &[f64],
    params: &DaeParams,
    cfg: &DaeConfig,
) -> Result<DaeGradients, DaeError> {
    cfg.validate()?;
    params.check_shapes()?;
    check_len(params.d_x(), x_clean.len())?;
    check_len(params.d_x(), x_tilde.len())?;
    let clean = DMatrix::from_column_slice(x_clean.len(), 1, x_clean);
    let noisy = DMatrix::from_column_slice(x_tilde.len(), 1, x_tilde);
    Ok(batch_gradients(params, &clean, &noisy, cfg))
}

/// The per-example objective that [`gradients`] differentiates.
pub fn objective(
    x_clean: &[f64],
    x_tilde: &[f64],
    params: &DaeParams,
    cfg: &DaeConfig,
) -> Result<f64, DaeError> {
    let h = encode(x_tilde, params)?;
    let y = decode(&h, params, cfg.decoder)?;
    let decay = params.w.norm_squared() + params.w_prime.norm_squared();
    Ok(reconstruction_loss(x_clean, &y, cfg.loss) + cfg.weight_decay * decay)
}

/// Heavy-ball state: `v ← m·v − η·g`, `θ ← θ + v`.
#[derive(Debug, Clone)]
pub(crate) struct Momentum {
    v: DaeGradients,
}

impl Momentum {
    pub(crate) fn new(d_x: usize, d_h: usize) -> Self {
        let z = DaeParams::zeros(d_x, d_h);
        Self {
            v: DaeGradients {
                w: z.w,
                b_h: z.b_h,
                w_prime: z.w_prime,
                b_y: z.b_y,
            },
        }
    }

    pub(crate) fn step(&mut self, p: &mut DaeParams, g: &DaeGradients, lr: f64, m: f64) {
        let v = &mut self.v;
        v.w = &v.w * m - &g.w * lr;
        v.b_h = &v.b_h * m - &g.b_h * lr;
        v.w_prime = &v.w_prime * m - &g.w_prime * lr;
        v.b_y = &v.b_y * m - &g.b_y * lr;
        p.w += &v.w;
        p.b_h += &v.b_h;
        p.w_prime += &v.w_prime;
        p.b_y += &v.b_y;
    }
}

#[derive(Debug, Clone)]
pub struct TrainedDae {
    pub params: DaeParams,
    /// Mean clean reconstruction loss over the training set after each epoch.
    pub epoch_losses: Vec<f64>,
    /// Number of parameter updates performed.
    pub updates: usize,
}

/// Mean clean reconstruction loss of `params` over `data`.
pub fn mean_clean_loss(
    data: &[Vec<f64>],
    params: &DaeParams,
    cfg: &DaeConfig,
) -> Result<f64, DaeError> {
    if data.is_empty() {
        return Err(DaeError::EmptyData);
    }
    for x in data {
        check_len(params.d_x(), x.len())?;
    }
    let x = matrix_from_columns(data, params.d_x());
    Ok(matrix_mean_loss(params, &x, cfg))
}

fn matrix_mean_loss(p: &DaeParams, x: &DMatrix<f64>, cfg: &DaeConfig) -> f64 {
    let y = forward(p, x, cfg.decoder).output;
    let total: f64 = x
        .column_iter()
        .zip(y.column_iter())
        .map(|(a, b)| reconstruction_loss(a.as_slice(), b.as_slice(), cfg.loss))
        .sum();
    total / x.ncols() as f64
}

fn validate_data(data: &[Vec<f64>], cfg: &DaeConfig) -> Result<(), DaeError> {
    if data.is_empty() {
        return Err(DaeError::EmptyData);
    }
    for (index, x) in data.iter().enumerate() {
        let bad = |reason: String| Err(DaeError::BadSample { index, reason });
        if x.len() != cfg.d_x {
            return bad(format!("length {} != d_x {}", x.len(), cfg.d_x));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return bad("non-finite value".into());
        }
        if cfg.loss == LossKind::CrossEntropy && x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return bad("cross-entropy inputs must lie in [0, 1]".into());
        }
    }
    Ok(())
}

/// Mini-batch SGD with momentum. Every epoch reshuffles the data and draws
/// a fresh corruption of every example.
pub fn train_dae(
    data: &[Vec<f64>],
    cfg: &DaeConfig,
    rng: &mut Stream,
) -> Result<TrainedDae, DaeError> {
    cfg.validate()?;
    validate_data(data, cfg)?;
    let mut params = DaeParams::init(cfg.d_x, cfg.d_h, cfg.decoder, rng);
    let mut momentum = Momentum::new(cfg.d_x, cfg.d_h);
    let clean_all = matrix_from_columns(data, cfg.d_x);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut updates = 0;

    for epoch in 1..=cfg.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(cfg.batch_size) {
            let clean = DMatrix::from_fn(cfg.d_x, chunk.len(), |i, j| data[chunk[j]][i]);
            let mut noisy = clean.clone();
            for (j, &k) in chunk.iter().enumerate() {
                let c = corrupt(&data[k], &cfg.corruption, rng);
                noisy.column_mut(j).copy_from_slice(&c);
            }
            let g = batch_gradients(&params, &clean, &noisy, cfg);
            momentum.step(&mut params, &g, cfg.learning_rate, cfg.momentum);
            updates += 1;
        }
        let loss = matrix_mean_loss(&params, &clean_all, cfg);
        if !loss.is_finite() || !params.is_finite() {
            return Err(DaeError::Divergence { epoch });
        }
        epoch_losses.push(loss);
    }
    Ok(TrainedDae {
        params,
        epoch_losses,
        updates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn random_params(d_x: usize, d_h: usize, rng: &mut Stream) -> DaeParams {
        let mut u = || 2.0 * rng.random::<f64>() - 1.0;
        DaeParams {
            w: DMatrix::from_fn(d_h, d_x, |_, _| u()),
            b_h: DVector::from_fn(d_h, |_, _| u()),
            w_prime: DMatrix::from_fn(d_x, d_h, |_, _| u()),
            b_y: DVector::from_fn(d_x, |_, _| u()),
        }
    }

    #[test]
    fn zero_encoder_gives_half() {
        let p = DaeParams::zeros(4, 3);
        assert_eq!(encode(&[1.0, -2.0, 3.0, 0.5], &p).unwrap(), vec![0.5; 3]);
    }

    #[test]
    fn scalar_encoder() {
        let mut p = DaeParams::zeros(1, 1);
        p.w[(0, 0)] = 1.0;
        let h = encode(&[1.0], &p).unwrap();
        assert!((h[0] - 0.731_058_578_630_005).abs() < 1e-12);
    }

    #[test]
    fn encode_decode_match_naive_loops() {
        let mut rng = stream(2);
        let p = random_params(6, 4, &mut rng);
        let x: Vec<f64> = (0..6).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let h = encode(&x, &p).unwrap();
        for j in 0..4 {
            let mut a = p.b_h[j];
            for i in 0..6 {
                a += p.w[(j, i)] * x[i];
            }
            assert!((h[j] - 1.0 / (1.0 + (-a).exp())).abs() < 1e-12);
        }
        for act in [DecoderActivation::Linear, DecoderActivation::Sigmoid] {
            let y = decode(&h, &p, act).unwrap();
            for i in 0..6 {
                let mut a = p.b_y[i];
                for j in 0..4 {
                    a += p.w_prime[(i, j)] * h[j];
                }
                let want = match act {
                    DecoderActivation::Linear => a,
                    DecoderActivation::Sigmoid => 1.0 / (1.0 + (-a).exp()),
                };
                assert!((y[i] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_decoder() {
        let p = DaeParams::zeros(3, 2);
        assert_eq!(decode(&[0.3, 0.9], &p, DecoderActivation::Linear).unwrap(), vec![0.0; 3]);
        assert_eq!(decode(&[0.3, 0.9], &p, DecoderActivation::Sigmoid).unwrap(), vec![0.5; 3]);
    }

    #[test]
    fn dimension_errors() {
        let p = DaeParams::zeros(3, 2);
        assert!(matches!(encode(&[1.0], &p), Err(DaeError::Dimension { .. })));
        assert!(decode(&[1.0, 2.0, 3.0], &p, DecoderActivation::Linear).is_err());
    }

    #[test]
    fn loss_values() {
        assert_eq!(reconstruction_loss(&[1.5, -2.0], &[1.5, -2.0], LossKind::Squared), 0.0);
        assert_eq!(reconstruction_loss(&[0.0, 1.0], &[1.0, 0.0], LossKind::Squared), 2.0);
        let ce = reconstruction_loss(&[0.5], &[0.5], LossKind::CrossEntropy);
        assert!((ce - std::f64::consts::LN_2).abs() < 1e-15);
        let clamped = reconstruction_loss(&[1.0], &[0.0], LossKind::CrossEntropy);
        assert!(clamped.is_finite() && clamped > 27.0);
    }

    #[test]
    fn no_corruption_is_identity() {
        let x = vec![0.1, 0.7, 0.3, 0.9];
        let mut rng = stream(1);
        for c in [
            Corruption::Gaussian { sigma: 0.0 },
            Corruption::Masking { rate: 0.0 },
            Corruption::SaltPepper {
                rate: 0.0,
                min: 0.0,
                max: 1.0,
            },
        ] {
            assert_eq!(corrupt(&x, &c, &mut rng), x);
        }
    }

    #[test]
    fn masking_count_exact() {
        let x = vec![1.0; 10];
        let mut rng = stream(4);
        for _ in 0..50 {
            let y = corrupt(&x, &Corruption::Masking { rate: 0.2 }, &mut rng);
            assert_eq!(y.iter().filter(|v| **v == 0.0).count(), 2);
        }
    }

    #[test]
    fn salt_pepper_hits_extremes() {
        let x = vec![0.5; 27];
        let mut rng = stream(4);
        let c = Corruption::SaltPepper {
            rate: 0.2,
            min: 0.0,
            max: 1.0,
        };
        let mut saw = (false, false);
        for _ in 0..20 {
            let y = corrupt(&x, &c, &mut rng);
            let changed: Vec<f64> = y.into_iter().filter(|v| *v != 0.5).collect();
            assert_eq!(changed.len(), 5);
            saw.0 |= changed.contains(&0.0);
            saw.1 |= changed.contains(&1.0);
        }
        assert!(saw.0 && saw.1);
    }

    #[test]
    fn gradient_zero_at_perfect_reconstruction() {
        // Decoder ignores h and reproduces x through its bias.
        let x = vec![0.3, -1.2, 2.0];
        let mut rng = stream(8);
        let mut p = random_params(3, 2, &mut rng);
        p.w_prime.fill(0.0);
        p.b_y = DVector::from_vec(x.clone());
        let mut cfg = DaeConfig::new(3, 2);
        cfg.decoder = DecoderActivation::Linear;
        let g = gradients(&x, &x, &p, &cfg).unwrap();
        for m in [g.w.norm(), g.b_h.norm(), g.w_prime.norm(), g.b_y.norm()] {
            assert_eq!(m, 0.0);
        }
    }

    #[test]
    fn decay_term_is_linear() {
        let mut rng = stream(3);
        let p = random_params(5, 3, &mut rng);
        let x: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
        let mut cfg = DaeConfig::new(5, 3);
        cfg.weight_decay = 0.01;
        let g1 = gradients(&x, &x, &p, &cfg).unwrap();
        cfg.weight_decay = 0.02;
        let g2 = gradients(&x, &x, &p, &cfg).unwrap();
        let delta = &g2.w - &g1.w;
        let expected = &p.w * (0.01 * 2.0);
        assert!((delta - expected).amax() < 1e-14);
    }

    #[test]
    fn pure_decay_shrinks_weights_every_update() {
        let mut rng = stream(6);
        let mut p = random_params(5, 3, &mut rng);
        let mut mom = Momentum::new(5, 3);
        let lambda = 0.05;
        let mut prev = p.w.norm();
        for _ in 0..200 {
            let g = DaeGradients {
                w: &p.w * (2.0 * lambda),
                b_h: DVector::zeros(3),
                w_prime: &p.w_prime * (2.0 * lambda),
                b_y: DVector::zeros(5),
            };
            mom.step(&mut p, &g, 0.02, 0.5);
            let now = p.w.norm();
            assert!(now < prev);
            prev = now;
        }
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = DaeConfig::new(3, 2);
        cfg.decoder = DecoderActivation::Linear;
        cfg.loss = LossKind::CrossEntropy;
        assert!(cfg.validate().is_err());
        cfg.decoder = DecoderActivation::Sigmoid;
        assert!(cfg.validate().is_ok());
        let mut cfg = DaeConfig::new(3, 2);
        cfg.epochs = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = DaeConfig::new(3, 2);
        cfg.learning_rate = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = DaeConfig::new(3, 2);
        cfg.corruption = Corruption::Masking { rate: 1.5 };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn converges_on_repeated_point() {
        let data = vec![vec![0.2, 0.8, 0.5, 0.1]; 64];
        let mut cfg = DaeConfig::new(4, 3);
        cfg.decoder = DecoderActivation::Linear;
        cfg.corruption = Corruption::Masking { rate: 0.0 };
        let t = train_dae(&data, &cfg, &mut stream(10)).unwrap();
        assert_eq!(t.epoch_losses.len(), 200);
        let first = t.epoch_losses[0];
        let last = *t.epoch_losses.last().unwrap();
        assert!(last < 0.01 * first, "first {first} last {last}");
    }

    #[test]
    fn one_epoch_update_count() {
        let data: Vec<Vec<f64>> = (0..70).map(|i| vec![i as f64 / 70.0; 3]).collect();
        let mut cfg = DaeConfig::new(3, 2);
        cfg.epochs = 1;
        let t = train_dae(&data, &cfg, &mut stream(1)).unwrap();
        assert_eq!(t.updates, 3);
        cfg.batch_size = 7;
        let t = train_dae(&data, &cfg, &mut stream(1)).unwrap();
        assert_eq!(t.updates, 10);
    }

    #[test]
    fn training_is_deterministic() {
        let mut rng = stream(5);
        let data: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..6).map(|_| rng.random::<f64>()).collect())
            .collect();
        let mut cfg = DaeConfig::new(6, 4);
        cfg.epochs = 5;
        let a = train_dae(&data, &cfg, &mut stream(77)).unwrap();
        let b = train_dae(&data, &cfg, &mut stream(77)).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.epoch_losses, b.epoch_losses);
    }

    #[test]
    fn divergence_reported_with_epoch() {
        let data = vec![vec![1e3, -1e3, 5e2]; 8];
        let mut cfg = DaeConfig::new(3, 2);
        cfg.decoder = DecoderActivation::Linear;
        cfg.learning_rate = 10.0;
        cfg.corruption = Corruption::Masking { rate: 0.0 };
        match train_dae(&data, &cfg, &mut stream(1)) {
            Err(DaeError::Divergence { epoch }) => assert!(epoch >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_data() {
        let cfg = DaeConfig::new(3, 2);
        assert_eq!(train_dae(&[], &cfg, &mut stream(1)).unwrap_err(), DaeError::EmptyData);
        let err = train_dae(&[vec![1.0, 2.0]], &cfg, &mut stream(1)).unwrap_err();
        assert!(matches!(err, DaeError::BadSample { index: 0, .. }));
    }
}
