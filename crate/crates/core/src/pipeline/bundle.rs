//! Self-describing JSON model bundle.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::config::{FeatureSet, PreprocessPolicy};
use super::preprocess::{kept_indices, preprocess, ScalingStats};
use super::{write_atomic, PipelineError};
use crate::elm::{self, ElmModel};
use crate::features_hand::compute_hand_features;
use crate::profiles::TcRecord;
use crate::sdae::{self, SdaeModel};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the pipeline config's `key=value` rendering.
    pub config_hash: String,
    /// The config itself, in `key=value` form.
    pub config: String,
    pub seed: u64,
    /// Latest timestamp among the records the classifier was fitted on.
    pub timestamp: i64,
    /// Description of the classifier's sample weighting.
    pub sample_weighting: String,
    /// Description of what the SDAE consumes.
    pub sdae_input: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundlePreprocessing {
    pub policy: PreprocessPolicy,
    /// Profile scaling in front of the SDAE (learned feature set).
    pub input_scaling: Option<ScalingStats>,
    /// Feature scaling in front of the ELM.
    pub feature_scaling: Option<ScalingStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub feature_set: FeatureSet,
    pub preprocessing: BundlePreprocessing,
    pub sdae: Option<SdaeModel>,
    pub elm: ElmModel,
    pub provenance: Provenance,
}

/// Feature rows for the records that pass the filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRows {
    pub kept: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
}

impl ModelBundle {
    /// Reject bundles whose parts do not fit together.
    pub fn check(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Bundle(m.to_string()));
        self.elm
            .check_shapes()
            .map_err(|e| PipelineError::Bundle(e.to_string()))?;
        match self.feature_set {
            FeatureSet::Learned => {
                let Some(model) = &self.sdae else {
                    return bad("learned bundle without an SDAE");
                };
                model
                    .check_chain()
                    .map_err(|e| PipelineError::Bundle(e.to_string()))?;
                let out = model.output_dim().unwrap_or(0);
                if out != self.elm.d_in() {
                    return bad("SDAE output width differs from ELM input width");
                }
                if let (Some(s), Some(d)) = (&self.preprocessing.input_scaling, model.input_dim()) {
                    if s.width() != d {
                        return bad("input scaling width differs from SDAE input width");
                    }
                }
                if let Some(s) = &self.preprocessing.feature_scaling {
                    if s.width() != out {
                        return bad("feature scaling width differs from SDAE output width");
                    }
                }
            }
            FeatureSet::Hand => {
                if let Some(s) = &self.preprocessing.feature_scaling {
                    if s.width() != self.elm.d_in() {
                        return bad("feature scaling width differs from ELM input width");
                    }
                }
            }
        }
        Ok(())
    }

    /// Features exactly as the classifier sees them.
    pub fn features(&self, records: &[TcRecord]) -> Result<FeatureRows, PipelineError> {
        match self.feature_set {
            FeatureSet::Learned => {
                let codes = self.learned_codes(records)?;
                let rows = match &self.preprocessing.feature_scaling {
                    Some(s) => codes.rows.iter().map(|r| s.apply(r)).collect::<Result<_, _>>()?,
                    None => codes.rows,
                };
                Ok(FeatureRows { kept: codes.kept, rows })
            }
            FeatureSet::Hand => {
                let (kept, raw) = hand_rows(records, self.preprocessing.policy.tnh_min)?;
                let rows = match &self.preprocessing.feature_scaling {
                    Some(s) => raw.iter().map(|r| s.apply(r)).collect::<Result<_, _>>()?,
                    None => raw,
                };
                Ok(FeatureRows { kept, rows })
            }
        }
    }

    /// Top-layer SDAE codes, before any scaling in front of the ELM.
    pub fn learned_codes(&self, records: &[TcRecord]) -> Result<FeatureRows, PipelineError> {
        let model = self
            .sdae
            .as_ref()
            .ok_or_else(|| PipelineError::Bundle("bundle has no SDAE".into()))?;
        let scaling = self.preprocessing.input_scaling.as_ref();
        if self.preprocessing.policy.rescale && scaling.is_none() {
            return Err(PipelineError::Bundle("missing input scaling".into()));
        }
        let p = preprocess(records, &self.preprocessing.policy, scaling)?;
        let rows = sdae::extract_all(&p.rows, model).map_err(|e| PipelineError::Data(e.to_string()))?;
        Ok(FeatureRows { kept: p.kept, rows })
    }

    /// One score per input record; `None` where the record is filtered out.
    pub fn score_records(&self, records: &[TcRecord]) -> Result<Vec<Option<f64>>, PipelineError> {
        let f = self.features(records)?;
        let scores = self.score_rows(&f.rows)?;
        let mut out = vec![None; records.len()];
        for (i, s) in f.kept.into_iter().zip(scores) {
            out[i] = Some(s);
        }
        Ok(out)
    }

    /// Scores for feature rows already produced by [`ModelBundle::features`].
    pub fn score_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, PipelineError> {
        if rows.is_empty() {
            return Ok(Vec::new());
        }
        let x = crate::linalg::matrix_from_rows(rows, self.elm.d_in());
        elm::score_batch(&x, &self.elm).map_err(|e| PipelineError::Data(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| PipelineError::Bundle(format!("unreadable bundle: {e}")))?;
        let found = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| PipelineError::Bundle("bundle has no format_version".into()))?;
        if found != u64::from(FORMAT_VERSION) {
            return Err(PipelineError::Version {
                found,
                expected: FORMAT_VERSION,
            });
        }
        let bundle: Self = serde_json::from_value(value)
            .map_err(|e| PipelineError::Bundle(format!("malformed bundle: {e}")))?;
        bundle.check()?;
        Ok(bundle)
    }
}

/// Raw (unscaled) handcrafted features of the filtered records.
pub fn hand_rows(
    records: &[TcRecord],
    tnh_min: f64,
) -> Result<(Vec<usize>, Vec<Vec<f64>>), PipelineError> {
    let kept = kept_indices(records, tnh_min);
    let rows = kept
        .iter()
        .map(|&i| {
            compute_hand_features(&records[i])
                .map(|f| f.values.to_vec())
                .map_err(|e| PipelineError::Data(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((kept, rows))
}

pub fn save_model(bundle: &ModelBundle, path: impl AsRef<Path>) -> Result<(), PipelineError> {
    write_atomic(path.as_ref(), bundle.to_json().as_bytes())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelBundle, PipelineError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| PipelineError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ModelBundle::from_json(&text)
}

pub(crate) fn rows_matrix(rows: &[Vec<f64>], width: usize) -> DMatrix<f64> {
    crate::linalg::matrix_from_rows(rows, width)
}
