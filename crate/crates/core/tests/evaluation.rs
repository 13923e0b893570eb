use std::collections::HashSet;
use std::sync::Mutex;

use proptest::prelude::*;

use exhaust_sentinel::eval::{
    auc, partitions, repeated_stratified_cv, roc, stratified_folds, write_report_csv,
    write_summary_csv, Pipeline, PipelineError,
};
use exhaust_sentinel::profiles::{Label, TcRecord};

fn mann_whitney(scores: &[f64], labels: &[u8]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

fn scored() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    prop::collection::vec((0u8..10, any::<bool>()), 2..120).prop_map(|v| {
        let mut scores: Vec<f64> = v.iter().map(|(s, _)| f64::from(*s) / 10.0).collect();
        let mut labels: Vec<u8> = v.iter().map(|(_, l)| u8::from(*l)).collect();
        labels[0] = 0;
        labels[1] = 1;
        scores[0] = 0.05;
        (scores, labels)
    })
}

proptest! {
    #[test]
    fn auc_is_mann_whitney((scores, labels) in scored()) {
        let a = auc(&roc(&scores, &labels).unwrap());
        prop_assert!((a - mann_whitney(&scores, &labels)).abs() <= 1e-12);
    }

    #[test]
    fn roc_ignores_monotone_transforms((scores, labels) in scored()) {
        let base = roc(&scores, &labels).unwrap();
        let warped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
        prop_assert_eq!(base, roc(&warped, &labels).unwrap());
    }

    #[test]
    fn folds_partition_and_stratify(labels in prop::collection::vec(prop::bool::weighted(0.1), 20..300), k in 2usize..8, seed in any::<u64>()) {
        let labels: Vec<u8> = labels.into_iter().map(u8::from).collect();
        let folds = stratified_folds(&labels, k, seed);
        prop_assert_eq!(folds.len(), labels.len());
        prop_assert!(folds.iter().all(|f| *f < k));
        for class in [0u8, 1] {
            let counts: Vec<usize> = (0..k)
                .map(|f| (0..labels.len()).filter(|&i| labels[i] == class && folds[i] == f).count())
                .collect();
            let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
            prop_assert!(hi - lo <= 1);
        }
    }
}

#[test]
fn partitions_are_reproducible_and_vary_by_run() {
    let labels: Vec<u8> = (0..100).map(|i| u8::from(i % 9 == 0)).collect();
    let a = partitions(&labels, 5, 3, 42);
    assert_eq!(a, partitions(&labels, 5, 3, 42));
    assert_ne!(a[0], a[1]);
}

fn records(n: usize) -> Vec<TcRecord> {
    (0..n)
        .map(|i| TcRecord {
            timestamp: i as i64,
            tc_temps: vec![1000.0 + i as f64, 1000.0, 1000.0],
            dwatt: 180.0,
            tnh: 99.0,
            label: if i % 10 == 0 { Label::Event } else { Label::Normal },
        })
        .collect()
}

/// Scores by timestamp and remembers every split it was handed.
struct Spy {
    seen: Mutex<Vec<(Vec<i64>, Vec<i64>, u64)>>,
}

impl Pipeline for Spy {
    fn name(&self) -> &str {
        "spy"
    }

    fn train_and_score(&self, train: &[TcRecord], test: &[TcRecord], seed: u64) -> Result<Vec<f64>, PipelineError> {
        let ids = |r: &[TcRecord]| r.iter().map(|r| r.timestamp).collect::<Vec<_>>();
        self.seen.lock().unwrap().push((ids(train), ids(test), seed));
        Ok(test.iter().map(|r| if r.label == Label::Event { 1.0 } else { 0.0 }).collect())
    }
}

#[test]
fn pipelines_never_see_test_records_in_training() {
    let data = records(60);
    let spy = Spy { seen: Mutex::new(Vec::new()) };
    let report = repeated_stratified_cv(&data, 5, 2, &spy, 7).unwrap();
    assert_eq!(report.entries.len(), 10);
    assert!(report.entries.iter().all(|e| e.auc == 1.0));
    let seen = spy.seen.into_inner().unwrap();
    assert_eq!(seen.len(), 10);
    let mut seeds = HashSet::new();
    for (train, test, seed) in &seen {
        let t: HashSet<_> = train.iter().collect();
        assert!(test.iter().all(|id| !t.contains(id)));
        assert_eq!(train.len() + test.len(), data.len());
        seeds.insert(*seed);
    }
    assert_eq!(seeds.len(), 10);
}

#[test]
fn report_csv_has_one_row_per_fold() {
    let spy = Spy { seen: Mutex::new(Vec::new()) };
    let report = repeated_stratified_cv(&records(40), 4, 3, &spy, 1).unwrap();
    let mut out = Vec::new();
    write_report_csv(std::slice::from_ref(&report), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 1 + 12);
    let mut summary = Vec::new();
    write_summary_csv(&[report], &mut summary).unwrap();
    assert_eq!(String::from_utf8(summary).unwrap().lines().count(), 2);
}

#[test]
fn unlabeled_records_are_rejected() {
    let mut data = records(30);
    data[3].label = Label::Unlabeled;
    let spy = Spy { seen: Mutex::new(Vec::new()) };
    assert!(repeated_stratified_cv(&data, 3, 1, &spy, 1).is_err());
}
