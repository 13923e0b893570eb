//! Pipeline configuration and its flat `key=value` file format.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::dae::{Corruption, DaeConfig, DecoderActivation, LossKind};
use crate::elm::{DEFAULT_HIDDEN, DEFAULT_RIDGE};
use crate::profiles::DEFAULT_TNH_MIN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdaeScope {
    /// One SDAE trained on an unsupervised pool, shared by every fold.
    Global,
    /// A fresh SDAE per fold, trained on that fold's normal training records.
    PerFold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    Hand,
    Learned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    Gaussian,
    Masking,
    SaltPepper,
}

macro_rules! keyword_enum {
    ($ty:ty { $($variant:path => $text:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($variant => $text),+ }
            }
        }
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($variant),)+
                    _ => Err(format!("unknown value {s:?}")),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

keyword_enum!(SdaeScope { SdaeScope::Global => "global", SdaeScope::PerFold => "per-fold" });
keyword_enum!(FeatureSet { FeatureSet::Hand => "hand", FeatureSet::Learned => "learned" });
keyword_enum!(CorruptionKind {
    CorruptionKind::Gaussian => "gaussian",
    CorruptionKind::Masking => "masking",
    CorruptionKind::SaltPepper => "salt_pepper",
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessPolicy {
    pub tnh_min: f64,
    /// Min-max rescale each normalized channel to [0, 1] with statistics
    /// fitted on training data.
    pub rescale: bool,
}

impl Default for PreprocessPolicy {
    fn default() -> Self {
        Self {
            tnh_min: DEFAULT_TNH_MIN,
            rescale: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdaeSettings {
    pub hidden: Vec<usize>,
    pub corruption: CorruptionKind,
    /// Rate for masking / salt-and-pepper, σ for Gaussian.
    pub noise_rate: f64,
    /// Optional per-layer override of `noise_rate`; missing layers fall
    /// back to it.
    pub layer_noise_rates: Vec<f64>,
    pub decoder: DecoderActivation,
    pub loss: LossKind,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub weight_decay: f64,
}

impl Default for SdaeSettings {
    fn default() -> Self {
        let dae = DaeConfig::new(1, 1);
        Self {
            hidden: vec![30, 12],
            corruption: CorruptionKind::Masking,
            noise_rate: 0.2,
            layer_noise_rates: Vec::new(),
            decoder: dae.decoder,
            loss: dae.loss,
            learning_rate: dae.learning_rate,
            momentum: dae.momentum,
            epochs: dae.epochs,
            batch_size: dae.batch_size,
            weight_decay: dae.weight_decay,
        }
    }
}

impl SdaeSettings {
    /// Chained per-layer DAE configs for inputs of width `d_in`.
    pub fn layer_configs(&self, d_in: usize) -> Vec<DaeConfig> {
        let mut d_x = d_in;
        self.hidden
            .iter()
            .enumerate()
            .map(|(i, &d_h)| {
                let rate = self.layer_noise_rates.get(i).copied().unwrap_or(self.noise_rate);
                let corruption = match self.corruption {
                    CorruptionKind::Gaussian => Corruption::Gaussian { sigma: rate },
                    CorruptionKind::Masking => Corruption::Masking { rate },
                    CorruptionKind::SaltPepper => Corruption::SaltPepper {
                        rate,
                        min: 0.0,
                        max: 1.0,
                    },
                };
                let cfg = DaeConfig {
                    d_x,
                    d_h,
                    decoder: self.decoder,
                    loss: self.loss,
                    corruption,
                    learning_rate: self.learning_rate,
                    momentum: self.momentum,
                    epochs: self.epochs,
                    batch_size: self.batch_size,
                    weight_decay: self.weight_decay,
                };
                d_x = d_h;
                cfg
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElmSettings {
    pub n_hidden: usize,
    pub ridge: f64,
    /// Balanced class weights `N / (2 N_class)`; uniform weights otherwise.
    pub class_weighting: bool,
}

impl Default for ElmSettings {
    fn default() -> Self {
        Self {
            n_hidden: DEFAULT_HIDDEN,
            ridge: DEFAULT_RIDGE,
            class_weighting: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub folds: usize,
    pub runs: usize,
    pub sdae_scope: SdaeScope,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            folds: 5,
            runs: 10,
            sdae_scope: SdaeScope::Global,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub preprocessing: PreprocessPolicy,
    pub sdae: SdaeSettings,
    pub elm: ElmSettings,
    pub eval: EvalSettings,
    pub seed: u64,
}

fn list<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, PipelineError> {
    value
        .parse()
        .map_err(|_| PipelineError::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, PipelineError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

fn decoder_str(d: DecoderActivation) -> &'static str {
    match d {
        DecoderActivation::Linear => "linear",
        DecoderActivation::Sigmoid => "sigmoid",
    }
}

fn loss_str(l: LossKind) -> &'static str {
    match l {
        LossKind::Squared => "squared",
        LossKind::CrossEntropy => "cross_entropy",
    }
}

impl PipelineConfig {
    /// Every key with its current value, one `key=value` per line.
    pub fn to_kv(&self) -> String {
        let s = &self.sdae;
        let lines = [
            format!("seed={}", self.seed),
            format!("preprocess.tnh_min={}", self.preprocessing.tnh_min),
            format!("preprocess.rescale={}", self.preprocessing.rescale),
            format!("sdae.hidden={}", list(&s.hidden)),
            format!("sdae.layer_noise_rates={}", list(&s.layer_noise_rates)),
            format!("dae.corruption={}", s.corruption),
            format!("dae.noise_rate={}", s.noise_rate),
            format!("dae.decoder={}", decoder_str(s.decoder)),
            format!("dae.loss={}", loss_str(s.loss)),
            format!("dae.learning_rate={}", s.learning_rate),
            format!("dae.momentum={}", s.momentum),
            format!("dae.epochs={}", s.epochs),
            format!("dae.batch_size={}", s.batch_size),
            format!("dae.weight_decay={}", s.weight_decay),
            format!("elm.n_hidden={}", self.elm.n_hidden),
            format!("elm.ridge={}", self.elm.ridge),
            format!("elm.class_weighting={}", self.elm.class_weighting),
            format!("eval.folds={}", self.eval.folds),
            format!("eval.runs={}", self.eval.runs),
            format!("eval.sdae_scope={}", self.eval.sdae_scope),
        ];
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }

    /// Apply one setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), PipelineError> {
        let v = value.trim();
        let s = &mut self.sdae;
        match key.trim() {
            "seed" => self.seed = parse(key, v)?,
            "preprocess.tnh_min" => self.preprocessing.tnh_min = parse(key, v)?,
            "preprocess.rescale" => self.preprocessing.rescale = parse(key, v)?,
            "sdae.hidden" => s.hidden = parse_list(key, v)?,
            "sdae.layer_noise_rates" => s.layer_noise_rates = parse_list(key, v)?,
            "dae.corruption" => s.corruption = v.parse().map_err(PipelineError::Config)?,
            "dae.noise_rate" => s.noise_rate = parse(key, v)?,
            "dae.decoder" => {
                s.decoder = match v {
                    "linear" => DecoderActivation::Linear,
                    "sigmoid" => DecoderActivation::Sigmoid,
                    _ => return Err(PipelineError::Config(format!("{key}: unknown {v:?}"))),
                }
            }
            "dae.loss" => {
                s.loss = match v {
                    "squared" => LossKind::Squared,
                    "cross_entropy" => LossKind::CrossEntropy,
                    _ => return Err(PipelineError::Config(format!("{key}: unknown {v:?}"))),
                }
            }
            "dae.learning_rate" => s.learning_rate = parse(key, v)?,
            "dae.momentum" => s.momentum = parse(key, v)?,
            "dae.epochs" => s.epochs = parse(key, v)?,
            "dae.batch_size" => s.batch_size = parse(key, v)?,
            "dae.weight_decay" => s.weight_decay = parse(key, v)?,
            "elm.n_hidden" => self.elm.n_hidden = parse(key, v)?,
            "elm.ridge" => self.elm.ridge = parse(key, v)?,
            "elm.class_weighting" => self.elm.class_weighting = parse(key, v)?,
            "eval.folds" => self.eval.folds = parse(key, v)?,
            "eval.runs" => self.eval.runs = parse(key, v)?,
            "eval.sdae_scope" => {
                self.eval.sdae_scope = v.parse().map_err(PipelineError::Config)?
            }
            other => return Err(PipelineError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Defaults overridden by a `key=value` text; `#` starts a comment.
    pub fn from_kv(text: &str) -> Result<Self, PipelineError> {
        let mut cfg = Self::default();
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    pub fn apply_kv(&mut self, text: &str) -> Result<(), PipelineError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                PipelineError::Config(format!("line {}: expected key=value", i + 1))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        let t = self.preprocessing.tnh_min;
        if !(t > 0.0 && t <= 200.0) {
            return bad("preprocess.tnh_min must be in (0, 200]");
        }
        if self.sdae.hidden.is_empty() || self.sdae.hidden.contains(&0) {
            return bad("sdae.hidden needs at least one positive width");
        }
        for cfg in self.sdae.layer_configs(1) {
            cfg.validate()
                .map_err(|e| PipelineError::Config(e.to_string()))?;
        }
        if self.elm.n_hidden == 0 {
            return bad("elm.n_hidden must be positive");
        }
        if !(self.elm.ridge.is_finite() && self.elm.ridge >= 0.0) {
            return bad("elm.ridge must be >= 0");
        }
        if self.eval.folds < 2 || self.eval.runs == 0 {
            return bad("eval.folds must be >= 2 and eval.runs >= 1");
        }
        Ok(())
    }

    /// SHA-256 of the canonical `key=value` rendering, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_kv().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
