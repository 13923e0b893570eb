//! End-to-end pipeline: configuration, preprocessing, model bundles and
//! the hand-vs-learned evaluation.

mod bundle;
mod config;
mod preprocess;
mod train;

use std::io::Write;
use std::path::Path;

use thiserror::Error;

pub use bundle::{
    hand_rows, load_model, save_model, BundlePreprocessing, FeatureRows, ModelBundle, Provenance,
    FORMAT_VERSION,
};
pub use config::{
    CorruptionKind, ElmSettings, EvalSettings, FeatureSet, PipelineConfig, PreprocessPolicy,
    SdaeScope, SdaeSettings,
};
pub use preprocess::{kept_indices, preprocess, Preprocessed, ScalingStats};
pub use train::{
    evaluate, fit_bundle, fit_learned_stage, train_stage, unsupervised_pool, Evaluation,
    FeaturePipeline, LearnedStage,
};

use crate::eval::EvalError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("training: {0}")]
    Train(String),
    #[error("model bundle: {0}")]
    Bundle(String),
    #[error("model bundle format version mismatch: file has {found}, expected {expected}")]
    Version { found: u64, expected: u32 },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Write `bytes` to a temporary file next to `path`, then rename it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let io = |e: std::io::Error| PipelineError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
