use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::roc::{roc, RocCurve};
use super::{EvalError, PipelineError, FPR_OPERATING_POINT};
use crate::profiles::TcRecord;
use crate::rng::{self, derive_seed};

/// Coordinate reserved for the partition stream of a run.
const PARTITION_STREAM: u64 = u64::MAX;

/// A train-then-score procedure evaluated by cross-validation.
pub trait Pipeline: Sync {
    fn name(&self) -> &str;

    /// Fit on `train` and return one score per `test` record, higher meaning
    /// more anomalous.
    fn train_and_score(
        &self,
        train: &[TcRecord],
        test: &[TcRecord],
        seed: u64,
    ) -> Result<Vec<f64>, PipelineError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvEntry {
    pub run: usize,
    pub fold: usize,
    pub auc: f64,
    pub tpr_at_1pct_fpr: f64,
    pub curve: RocCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub feature_set: String,
    pub runs: usize,
    pub folds: usize,
    /// Ordered by (run, fold).
    pub entries: Vec<CvEntry>,
    pub auc_mean: f64,
    pub auc_std: f64,
    pub tpr_mean: f64,
    pub tpr_std: f64,
}

/// Mean and sample standard deviation (n − 1 denominator; 0 for n < 2).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl CvReport {
    fn assemble(feature_set: &str, runs: usize, folds: usize, entries: Vec<CvEntry>) -> Self {
        let aucs: Vec<f64> = entries.iter().map(|e| e.auc).collect();
        let tprs: Vec<f64> = entries.iter().map(|e| e.tpr_at_1pct_fpr).collect();
        let (auc_mean, auc_std) = mean_std(&aucs);
        let (tpr_mean, tpr_std) = mean_std(&tprs);
        Self {
            feature_set: feature_set.to_string(),
            runs,
            folds,
            entries,
            auc_mean,
            auc_std,
            tpr_mean,
            tpr_std,
        }
    }
}

/// Assign each sample a fold in `0..k`, class by class, so every fold gets
/// its share of each class to within one sample.
pub fn stratified_folds(labels: &[u8], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::stream(seed);
    let mut folds = vec![0; labels.len()];
    let mut offset = 0;
    for class in [1u8, 0u8] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for (j, &i) in idx.iter().enumerate() {
            folds[i] = (offset + j) % k;
        }
        offset = (offset + idx.len()) % k;
    }
    folds
}

fn binary_labels(records: &[TcRecord]) -> Result<Vec<u8>, EvalError> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| r.label.class().ok_or(EvalError::Unlabeled(i)))
        .collect()
}

/// Fold assignment of every run, as used by [`repeated_stratified_cv`].
pub fn partitions(labels: &[u8], k: usize, runs: usize, master_seed: u64) -> Vec<Vec<usize>> {
    (0..runs)
        .map(|run| stratified_folds(labels, k, derive_seed(master_seed, run as u64, PARTITION_STREAM)))
        .collect()
}

/// `runs` repetitions of stratified `k`-fold CV. Fold `(run, fold)` hands the
/// pipeline seed `derive_seed(master_seed, run, fold)`; folds run in
/// parallel and entries come back ordered by (run, fold).
pub fn repeated_stratified_cv(
    records: &[TcRecord],
    k: usize,
    runs: usize,
    pipeline: &dyn Pipeline,
    master_seed: u64,
) -> Result<CvReport, EvalError> {
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    let labels = binary_labels(records)?;
    let pos = labels.iter().filter(|l| **l == 1).count();
    let minority = pos.min(labels.len() - pos);
    if minority < k {
        return Err(EvalError::TooFewMinority { have: minority, k });
    }

    let parts = partitions(&labels, k, runs, master_seed);
    let tasks: Vec<(usize, usize)> = (0..runs).flat_map(|r| (0..k).map(move |f| (r, f))).collect();
    let entries = tasks
        .par_iter()
        .map(|&(run, fold)| {
            let assign = &parts[run];
            let mut train = Vec::new();
            let mut test = Vec::new();
            let mut test_labels = Vec::new();
            for (i, r) in records.iter().enumerate() {
                if assign[i] == fold {
                    test.push(r.clone());
                    test_labels.push(labels[i]);
                } else {
                    train.push(r.clone());
                }
            }
            let seed = derive_seed(master_seed, run as u64, fold as u64);
            let scores = pipeline
                .train_and_score(&train, &test, seed)
                .map_err(|e| EvalError::Pipeline {
                    run,
                    fold,
                    message: e.to_string(),
                })?;
            if scores.len() != test.len() {
                return Err(EvalError::Pipeline {
                    run,
                    fold,
                    message: format!("{} scores for {} test records", scores.len(), test.len()),
                });
            }
            let curve = roc(&scores, &test_labels)?;
            Ok(CvEntry {
                run,
                fold,
                auc: curve.auc(),
                tpr_at_1pct_fpr: curve.tpr_at_fpr(FPR_OPERATING_POINT),
                curve,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(CvReport::assemble(pipeline.name(), runs, k, entries))
}

/// `run,fold,feature_set,auc,tpr_at_1pct_fpr`
pub fn write_report_csv<W: Write>(reports: &[CvReport], w: W) -> Result<(), EvalError> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(["run", "fold", "feature_set", "auc", "tpr_at_1pct_fpr"])?;
    for rep in reports {
        for e in &rep.entries {
            out.write_record([
                e.run.to_string(),
                e.fold.to_string(),
                rep.feature_set.clone(),
                e.auc.to_string(),
                e.tpr_at_1pct_fpr.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One line per feature set with the aggregate metrics.
pub fn write_summary_csv<W: Write>(reports: &[CvReport], w: W) -> Result<(), EvalError> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record([
        "feature_set",
        "runs",
        "folds",
        "auc_mean",
        "auc_std",
        "tpr_at_1pct_fpr_mean",
        "tpr_at_1pct_fpr_std",
    ])?;
    for rep in reports {
        out.write_record([
            rep.feature_set.clone(),
            rep.runs.to_string(),
            rep.folds.to_string(),
            rep.auc_mean.to_string(),
            rep.auc_std.to_string(),
            rep.tpr_mean.to_string(),
            rep.tpr_std.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `feature_set,run,fold,fpr,tpr`, every vertex of every curve.
pub fn write_roc_points_csv<W: Write>(reports: &[CvReport], w: W) -> Result<(), EvalError> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(["feature_set", "run", "fold", "fpr", "tpr"])?;
    for rep in reports {
        for e in &rep.entries {
            for p in &e.curve.points {
                out.write_record([
                    rep.feature_set.clone(),
                    e.run.to_string(),
                    e.fold.to_string(),
                    p.fpr.to_string(),
                    p.tpr.to_string(),
                ])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_class_counts_balanced() {
        let mut labels = vec![0u8; 5000];
        labels.extend(vec![1u8; 100]);
        let folds = stratified_folds(&labels, 5, 3);
        for f in 0..5 {
            let pos = (0..labels.len()).filter(|&i| folds[i] == f && labels[i] == 1).count();
            let neg = (0..labels.len()).filter(|&i| folds[i] == f && labels[i] == 0).count();
            assert_eq!(pos, 20);
            assert_eq!(neg, 1000);
        }
    }

    #[test]
    fn uneven_counts_within_one() {
        let mut labels = vec![0u8; 103];
        labels.extend(vec![1u8; 13]);
        let folds = stratified_folds(&labels, 5, 8);
        for class in [0u8, 1u8] {
            let counts: Vec<usize> = (0..5)
                .map(|f| (0..labels.len()).filter(|&i| folds[i] == f && labels[i] == class).count())
                .collect();
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            assert!(hi - lo <= 1, "{counts:?}");
        }
        let totals: Vec<usize> = (0..5).map(|f| folds.iter().filter(|x| **x == f).count()).collect();
        assert!(totals.iter().max().unwrap() - totals.iter().min().unwrap() <= 1);
    }

    #[test]
    fn mean_std_values() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
    }
}
