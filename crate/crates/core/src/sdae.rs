//! Greedy layer-wise stacking of denoising autoencoders.
//!
//! Layer `k` is trained as a DAE on the clean data pushed through the
//! encoders of layers `1..k`. Corruption happens only inside each layer's
//! own training; decoders are dropped once a layer is trained.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dae::{self, DaeConfig, DaeError};
use crate::linalg::{serde_rows, serde_vec};
use crate::rng::{self, Stream};
use rand::Rng;

#[derive(Debug, Error, PartialEq)]
pub enum SdaeError {
    #[error("layer {layer}: {source}")]
    Layer { layer: usize, source: DaeError },
    #[error("no layer specs given")]
    NoLayers,
    #[error("layer {layer} expects input dimension {expected}, got {got}")]
    Chain {
        layer: usize,
        expected: usize,
        got: usize,
    },
    #[error("input dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// A trained encoder: `sigmoid(W x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderLayer {
    #[serde(with = "serde_rows")]
    pub w: DMatrix<f64>,
    #[serde(with = "serde_vec")]
    pub b: DVector<f64>,
}

impl EncoderLayer {
    pub fn input_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn encode(&self, x: &[f64]) -> Vec<f64> {
        dae::encode_raw(&self.w, &self.b, x)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SdaeModel {
    pub layers: Vec<EncoderLayer>,
}

impl SdaeModel {
    pub fn input_dim(&self) -> Option<usize> {
        self.layers.first().map(EncoderLayer::input_dim)
    }

    pub fn output_dim(&self) -> Option<usize> {
        self.layers.last().map(EncoderLayer::output_dim)
    }

    /// Layer shapes as `(output, input)` pairs.
    pub fn shapes(&self) -> Vec<(usize, usize)> {
        self.layers.iter().map(|l| l.w.shape()).collect()
    }

    /// Check that consecutive layers chain and every bias fits its layer.
    pub fn check_chain(&self) -> Result<(), SdaeError> {
        for (i, l) in self.layers.iter().enumerate() {
            if l.b.len() != l.output_dim() {
                return Err(SdaeError::Chain {
                    layer: i + 1,
                    expected: l.output_dim(),
                    got: l.b.len(),
                });
            }
            if i > 0 && self.layers[i - 1].output_dim() != l.input_dim() {
                return Err(SdaeError::Chain {
                    layer: i + 1,
                    expected: self.layers[i - 1].output_dim(),
                    got: l.input_dim(),
                });
            }
        }
        Ok(())
    }
}

/// Encode through every layer. An empty stack is the identity.
pub fn extract(x: &[f64], model: &SdaeModel) -> Result<Vec<f64>, SdaeError> {
    if let Some(d) = model.input_dim() {
        if d != x.len() {
            return Err(SdaeError::Dimension {
                expected: d,
                got: x.len(),
            });
        }
    }
    Ok(model
        .layers
        .iter()
        .fold(x.to_vec(), |acc, layer| layer.encode(&acc)))
}

/// Extract features for a batch of inputs, one row per input.
pub fn extract_all(data: &[Vec<f64>], model: &SdaeModel) -> Result<Vec<Vec<f64>>, SdaeError> {
    data.iter().map(|x| extract(x, model)).collect()
}

#[derive(Debug, Clone)]
pub struct TrainedSdae {
    pub model: SdaeModel,
    /// Per-layer, per-epoch mean clean reconstruction loss.
    pub epoch_losses: Vec<Vec<f64>>,
}

/// Train one DAE per layer config, in order. Each layer draws from its own stream
/// keyed by a seed taken from `rng`, so layer `k`'s result does not depend
/// on how many draws layer `k-1` consumed.
pub fn train_sdae(
    data: &[Vec<f64>],
    specs: &[DaeConfig],
    rng: &mut Stream,
) -> Result<TrainedSdae, SdaeError> {
    if specs.is_empty() {
        return Err(SdaeError::NoLayers);
    }
    let mut layers = Vec::with_capacity(specs.len());
    let mut epoch_losses = Vec::with_capacity(specs.len());
    let mut current = data.to_vec();
    for (i, cfg) in specs.iter().enumerate() {
        let layer = i + 1;
        let input_dim = current.first().map_or(cfg.d_x, Vec::len);
        if input_dim != cfg.d_x {
            return Err(SdaeError::Chain {
                layer,
                expected: cfg.d_x,
                got: input_dim,
            });
        }
        let mut layer_rng = rng::stream(rng.random());
        let trained = dae::train_dae(&current, cfg, &mut layer_rng)
            .map_err(|source| SdaeError::Layer { layer, source })?;
        let enc = EncoderLayer {
            w: trained.params.w,
            b: trained.params.b_h,
        };
        if i + 1 < specs.len() {
            current = current.iter().map(|x| enc.encode(x)).collect();
        }
        layers.push(enc);
        epoch_losses.push(trained.epoch_losses);
    }
    Ok(TrainedSdae {
        model: SdaeModel { layers },
        epoch_losses,
    })
}
