//! Fitting model bundles and wiring them into cross-validation.

use super::bundle::{hand_rows, rows_matrix, BundlePreprocessing, ModelBundle, Provenance, FORMAT_VERSION};
use super::config::{FeatureSet, PipelineConfig, SdaeScope};
use super::preprocess::{preprocess, ScalingStats};
use super::PipelineError;
use crate::elm::{self, SampleWeights};
use crate::eval::{self, CvReport, Pipeline};
use crate::profiles::{filter_records, Label, TcRecord};
use crate::rng::{self, derive_seed};
use crate::sdae::{self, SdaeModel};

const SDAE_STREAM: u64 = 1;
const ELM_STREAM: u64 = 2;
/// Coordinate reserved for the global-scope SDAE seed.
const GLOBAL_STAGE: u64 = u64::MAX - 1;

const SDAE_INPUT: &str =
    "mean-normalized profiles, per-channel min-max rescaled to [0,1] with stats fitted on all training records";

/// The unsupervised half of the learned pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedStage {
    pub input_scaling: Option<ScalingStats>,
    pub sdae: SdaeModel,
    pub epoch_losses: Vec<Vec<f64>>,
}

/// Records used for feature learning: the normal-labeled ones.
pub fn unsupervised_pool(records: &[TcRecord]) -> Vec<TcRecord> {
    records
        .iter()
        .filter(|r| r.label == Label::Normal)
        .cloned()
        .collect()
}

/// Fit profile scaling on `scale_on` and train the SDAE on `pool`.
///
/// `scale_on` is the full training input, labels unused, so that profiles
/// colder than anything in the normal pool still land inside [0, 1].
pub fn fit_learned_stage(
    pool: &[TcRecord],
    scale_on: &[TcRecord],
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<LearnedStage, PipelineError> {
    let stats = if cfg.preprocessing.rescale {
        preprocess(scale_on, &cfg.preprocessing, None)?.stats
    } else {
        None
    };
    let p = preprocess(pool, &cfg.preprocessing, stats.as_ref())?;
    let width = p
        .rows
        .first()
        .map(Vec::len)
        .ok_or_else(|| PipelineError::Data("unsupervised pool is empty after filtering".into()))?;
    let specs = cfg.sdae.layer_configs(width);
    let trained = sdae::train_sdae(&p.rows, &specs, &mut rng::stream(seed))
        .map_err(|e| PipelineError::Train(e.to_string()))?;
    Ok(LearnedStage {
        input_scaling: p.stats,
        sdae: trained.model,
        epoch_losses: trained.epoch_losses,
    })
}

/// The learned stage [`fit_bundle`] trains when it is not given one: SDAE
/// on the normal records of `pool` (default `train`), scaling fitted on
/// `train`.
pub fn train_stage(
    train: &[TcRecord],
    pool: Option<&[TcRecord]>,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<LearnedStage, PipelineError> {
    let pool = unsupervised_pool(pool.unwrap_or(train));
    fit_learned_stage(&pool, train, cfg, derive_seed(seed, SDAE_STREAM, 0))
}

/// Fit a complete bundle on `train`.
///
/// For the learned feature set, `stage` supplies a pre-trained SDAE; when it
/// is `None` one is trained on the normal records of `train`.
pub fn fit_bundle(
    train: &[TcRecord],
    feature_set: FeatureSet,
    stage: Option<&LearnedStage>,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<ModelBundle, PipelineError> {
    cfg.validate()?;
    let mut preprocessing = BundlePreprocessing {
        policy: cfg.preprocessing.clone(),
        input_scaling: None,
        feature_scaling: None,
    };
    let mut sdae_model = None;
    match feature_set {
        FeatureSet::Learned => {
            let own;
            let stage = match stage {
                Some(s) => s,
                None => {
                    own = train_stage(train, None, cfg, seed)?;
                    &own
                }
            };
            preprocessing.input_scaling = stage.input_scaling.clone();
            sdae_model = Some(stage.sdae.clone());
            if cfg.preprocessing.rescale {
                let p = preprocess(train, &cfg.preprocessing, stage.input_scaling.as_ref())?;
                if p.rows.is_empty() {
                    return Err(PipelineError::Data("no training records after filtering".into()));
                }
                let codes = sdae::extract_all(&p.rows, &stage.sdae)
                    .map_err(|e| PipelineError::Data(e.to_string()))?;
                preprocessing.feature_scaling = Some(ScalingStats::fit(&codes)?);
            }
        }
        FeatureSet::Hand => {
            if cfg.preprocessing.rescale {
                let (_, raw) = hand_rows(train, cfg.preprocessing.tnh_min)?;
                if raw.is_empty() {
                    return Err(PipelineError::Data("no training records after filtering".into()));
                }
                preprocessing.feature_scaling = Some(ScalingStats::fit(&raw)?);
            }
        }
    }

    let d_in = match &sdae_model {
        Some(m) => m.output_dim().unwrap_or(0),
        None => crate::features_hand::N_HAND_FEATURES,
    };
    let mut elm_rng = rng::stream(derive_seed(seed, ELM_STREAM, 0));
    let elm_model = elm::init_elm(d_in, cfg.elm.n_hidden, cfg.elm.ridge, &mut elm_rng);
    let weighting = if cfg.elm.class_weighting {
        "balanced classes: w_i = N / (2 N_class(i))"
    } else {
        "uniform"
    };
    let mut bundle = ModelBundle {
        format_version: FORMAT_VERSION,
        feature_set,
        preprocessing,
        sdae: sdae_model,
        elm: elm_model,
        provenance: Provenance {
            config_hash: cfg.hash(),
            config: cfg.to_kv(),
            seed,
            timestamp: 0,
            sample_weighting: weighting.into(),
            sdae_input: SDAE_INPUT.into(),
        },
    };

    let feats = bundle.features(train)?;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut latest = i64::MIN;
    for (i, row) in feats.kept.iter().zip(feats.rows) {
        if let Some(class) = train[*i].label.class() {
            rows.push(row);
            labels.push(class);
            latest = latest.max(train[*i].timestamp);
        }
    }
    if rows.is_empty() {
        return Err(PipelineError::Data("no labeled training records after filtering".into()));
    }
    let weights = if cfg.elm.class_weighting {
        elm::class_weights(&labels).map_err(|e| PipelineError::Train(e.to_string()))?
    } else {
        SampleWeights::uniform(labels.len())
    };
    let targets: Vec<f64> = labels.iter().map(|l| f64::from(*l)).collect();
    bundle
        .elm
        .fit(&rows_matrix(&rows, d_in), &targets, &weights)
        .map_err(|e| PipelineError::Train(e.to_string()))?;
    bundle.provenance.timestamp = latest;
    Ok(bundle)
}

/// A feature set plus classifier, evaluated as one cross-validation
/// pipeline.
pub struct FeaturePipeline<'a> {
    pub feature_set: FeatureSet,
    pub cfg: &'a PipelineConfig,
    /// Shared SDAE for global scope; `None` trains one per fold.
    pub global_stage: Option<&'a LearnedStage>,
}

impl Pipeline for FeaturePipeline<'_> {
    fn name(&self) -> &str {
        self.feature_set.as_str()
    }

    fn train_and_score(
        &self,
        train: &[TcRecord],
        test: &[TcRecord],
        seed: u64,
    ) -> Result<Vec<f64>, eval::PipelineError> {
        let bundle = fit_bundle(train, self.feature_set, self.global_stage, self.cfg, seed)?;
        let scores = bundle.score_records(test)?;
        scores
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| format!("test record {i} was filtered out").into()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub reports: Vec<CvReport>,
    pub global_stage: Option<LearnedStage>,
    /// Records that entered cross-validation.
    pub n_records: usize,
}

/// Filter, then run repeated stratified CV for each feature set with the
/// same partitions. In global scope the SDAE is trained once on `pool`, or
/// on the normal records of `records` when no pool is given.
pub fn evaluate(
    records: &[TcRecord],
    pool: Option<&[TcRecord]>,
    feature_sets: &[FeatureSet],
    cfg: &PipelineConfig,
) -> Result<Evaluation, PipelineError> {
    cfg.validate()?;
    let data: Vec<TcRecord> = filter_records(records, cfg.preprocessing.tnh_min)
        .into_iter()
        .filter(|r| r.label != Label::Unlabeled)
        .collect();
    let needs_stage = cfg.eval.sdae_scope == SdaeScope::Global && feature_sets.contains(&FeatureSet::Learned);
    let global_stage = if needs_stage {
        let pool = match pool {
            Some(p) => unsupervised_pool(p),
            None => unsupervised_pool(&data),
        };
        Some(fit_learned_stage(&pool, &data, cfg, derive_seed(cfg.seed, GLOBAL_STAGE, 0))?)
    } else {
        None
    };
    let mut reports = Vec::with_capacity(feature_sets.len());
    for &fs in feature_sets {
        let pipeline = FeaturePipeline {
            feature_set: fs,
            cfg,
            global_stage: global_stage.as_ref(),
        };
        reports.push(eval::repeated_stratified_cv(
            &data,
            cfg.eval.folds,
            cfg.eval.runs,
            &pipeline,
            cfg.seed,
        )?);
    }
    Ok(Evaluation {
        reports,
        global_stage,
        n_records: data.len(),
    })
}
