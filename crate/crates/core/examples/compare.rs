//! Hand vs learned feature comparison on a desk-scale simulated dataset.
//!
//! `cargo run --release --example compare -- [runs] [seed]`

use std::time::Instant;

use exhaust_sentinel::pipeline::{evaluate, FeatureSet, PipelineConfig};
use exhaust_sentinel::simdata::{gen_dataset, FaultDistribution, SimConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let runs: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let data = gen_dataset(&SimConfig { seed, ..SimConfig::desk_scale() }, &FaultDistribution::default()).unwrap();
    let mut cfg = PipelineConfig::default();
    cfg.eval.runs = runs;
    let t = Instant::now();
    let ev = evaluate(&data.records, None, &[FeatureSet::Hand, FeatureSet::Learned], &cfg).unwrap();
    for r in &ev.reports {
        println!(
            "{:8} auc {:.4} +/- {:.4}  tpr@1% {:.4} +/- {:.4}",
            r.feature_set, r.auc_mean, r.auc_std, r.tpr_mean, r.tpr_std
        );
    }
    if let Some(s) = &ev.global_stage {
        for (i, l) in s.epoch_losses.iter().enumerate() {
            println!("layer {} loss first {:.4} last {:.4}", i + 1, l[0], l[l.len() - 1]);
        }
    }
    println!("elapsed {:.1}s", t.elapsed().as_secs_f64());
}
