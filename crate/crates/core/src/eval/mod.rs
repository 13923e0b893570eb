//! ROC analysis and repeated stratified cross-validation.

mod cv;
mod roc;
mod svg;

use thiserror::Error;

pub use cv::{
    mean_std, partitions, repeated_stratified_cv, stratified_folds, write_report_csv,
    write_roc_points_csv, write_summary_csv, CvEntry, CvReport, Pipeline,
};
pub use roc::{auc, roc, tpr_at_fpr, RocCurve, RocPoint};
pub use svg::roc_svg;

/// Operating point used for the headline sensitivity figure.
pub const FPR_OPERATING_POINT: f64 = 0.01;

pub type PipelineError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("ROC needs both classes present")]
    SingleClass,
    #[error("{scores} scores but {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("scores must be finite")]
    NonFiniteScore,
    #[error("labels must be 0 or 1, found {0}")]
    BadLabel(u8),
    #[error("ROC points must be monotone, within [0, 1], and run from (0,0) to (1,1)")]
    InvalidCurve,
    #[error("record {0} is unlabeled")]
    Unlabeled(usize),
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("only {have} minority samples for {k} folds")]
    TooFewMinority { have: usize, k: usize },
    #[error("run {run}, fold {fold}: {message}")]
    Pipeline {
        run: usize,
        fold: usize,
        message: String,
    },
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for EvalError {
    fn from(e: csv::Error) -> Self {
        EvalError::Csv(e.to_string())
    }
}

impl From<std::io::Error> for EvalError {
    fn from(e: std::io::Error) -> Self {
        EvalError::Csv(e.to_string())
    }
}
