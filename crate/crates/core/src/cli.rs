//! The `exhaust-sentinel` command line: `simulate`, `train`, `features`,
//! `evaluate` and `score`.
//!
//! Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.

use std::error::Error;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::eval::{roc_svg, write_report_csv, write_roc_points_csv, write_summary_csv};
use crate::features_hand::HAND_FEATURE_NAMES;
use crate::pipeline::{
    evaluate, fit_bundle, hand_rows, load_model, save_model, train_stage, write_atomic, FeatureSet,
    PipelineConfig, SdaeScope,
};
use crate::profiles::{load_csv, to_csv_bytes, CsvSchema, Dataset, TcRecord};
use crate::simdata::{gen_dataset, FaultDistribution, SimConfig};

type CliResult<T = ()> = Result<T, Box<dyn Error>>;

#[derive(Debug, Parser)]
#[command(name = "exhaust-sentinel", version, about = "Combustor anomaly detection from exhaust thermocouple profiles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic thermocouple dataset.
    Simulate(SimulateArgs),
    /// Fit a model bundle on a labeled dataset.
    Train(TrainArgs),
    /// Write handcrafted or learned features of a dataset.
    Features(FeaturesArgs),
    /// Cross-validate the hand and learned feature pipelines.
    Evaluate(EvaluateArgs),
    /// Score a dataset with a saved model bundle.
    Score(ScoreArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FeatureChoice {
    Hand,
    Learned,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SetChoice {
    Hand,
    Learned,
}

impl From<SetChoice> for FeatureSet {
    fn from(s: SetChoice) -> Self {
        match s {
            SetChoice::Hand => FeatureSet::Hand,
            SetChoice::Learned => FeatureSet::Learned,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScopeChoice {
    Global,
    PerFold,
}

#[derive(Debug, clap::Args)]
struct SimulateArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    n_normal: Option<usize>,
    #[arg(long)]
    n_fault: Option<usize>,
    #[arg(long)]
    n_cans: Option<usize>,
    #[arg(long)]
    swirl_amp: Option<f64>,
    #[arg(long)]
    noise_std: Option<f64>,
    /// Cold-spot depth range, °F.
    #[arg(long)]
    depth_min: Option<f64>,
    #[arg(long)]
    depth_max: Option<f64>,
    /// Cold-spot width range, in cans.
    #[arg(long)]
    width_min: Option<f64>,
    #[arg(long)]
    width_max: Option<f64>,
    /// Fraction of faults that are cold spots; the rest are hot spots.
    #[arg(long)]
    cold_fraction: Option<f64>,
}

#[derive(Debug, clap::Args)]
struct CommonArgs {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tnh_min: Option<f64>,
}

#[derive(Debug, clap::Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "learned")]
    features: SetChoice,
    /// Dataset whose normal records train the SDAE (default: --data).
    #[arg(long)]
    pool: Option<PathBuf>,
    /// Per-epoch SDAE losses as `layer,epoch,mean_clean_loss`.
    #[arg(long)]
    loss_log: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, clap::Args)]
struct FeaturesArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "hand")]
    set: SetChoice,
    /// Model bundle holding the SDAE; required for `--set learned`.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    tnh_min: Option<f64>,
}

#[derive(Debug, clap::Args)]
struct EvaluateArgs {
    #[arg(long)]
    data: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    features: FeatureChoice,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long, value_enum)]
    sdae_scope: Option<ScopeChoice>,
    /// Dataset whose normal records train the global-scope SDAE.
    #[arg(long)]
    pool: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, clap::Args)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Parse `argv` (program name first), run the command and return the exit
/// code. Errors are reported on stderr.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Train(a) => train(a),
        Command::Features(a) => features(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Score(a) => score(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Entry point for the binary.
pub fn run() -> i32 {
    run_command(std::env::args_os())
}

fn simulate(a: SimulateArgs) -> CliResult {
    let mut cfg = SimConfig { seed: a.seed, ..SimConfig::default() };
    let mut faults = FaultDistribution::default();
    set(&mut cfg.n_normal, a.n_normal);
    set(&mut cfg.n_fault, a.n_fault);
    set(&mut cfg.n_cans, a.n_cans);
    set(&mut cfg.swirl_amp, a.swirl_amp);
    set(&mut cfg.sensor_noise_std, a.noise_std);
    set(&mut faults.depth_min, a.depth_min);
    set(&mut faults.depth_max, a.depth_max);
    set(&mut faults.width_min, a.width_min);
    set(&mut faults.width_max, a.width_max);
    set(&mut faults.cold_fraction, a.cold_fraction);
    let ds = gen_dataset(&cfg, &faults)?;
    write_atomic(&a.out, &to_csv_bytes(&ds))?;
    Ok(())
}

fn train(a: TrainArgs) -> CliResult {
    let cfg = load_config(&a.common)?;
    let data = read_dataset(&a.data)?;
    let pool = a.pool.as_deref().map(read_dataset).transpose()?;
    let feature_set = FeatureSet::from(a.features);
    let bundle = match feature_set {
        FeatureSet::Learned => {
            let pool = pool.as_ref().map(|p| p.records.as_slice());
            let stage = train_stage(&data.records, pool, &cfg, cfg.seed)?;
            if let Some(path) = &a.loss_log {
                let mut text = String::from("layer,epoch,mean_clean_loss\n");
                for (layer, losses) in stage.epoch_losses.iter().enumerate() {
                    for (epoch, loss) in losses.iter().enumerate() {
                        text.push_str(&format!("{},{},{}\n", layer + 1, epoch + 1, loss));
                    }
                }
                write_atomic(path, text.as_bytes())?;
            }
            fit_bundle(&data.records, feature_set, Some(&stage), &cfg, cfg.seed)?
        }
        FeatureSet::Hand => fit_bundle(&data.records, feature_set, None, &cfg, cfg.seed)?,
    };
    save_model(&bundle, &a.out)?;
    Ok(())
}

fn features(a: FeaturesArgs) -> CliResult {
    let data = read_dataset(&a.data)?;
    let records = &data.records;
    let mut w = csv::Writer::from_writer(Vec::new());
    match FeatureSet::from(a.set) {
        FeatureSet::Hand => {
            let tnh_min = match (&a.model, a.tnh_min) {
                (_, Some(t)) => t,
                (Some(m), None) => load_model(m)?.preprocessing.policy.tnh_min,
                (None, None) => PipelineConfig::default().preprocessing.tnh_min,
            };
            let (kept, rows) = hand_rows(records, tnh_min)?;
            let mut header = vec!["timestamp".to_string(), "label".to_string()];
            header.extend(HAND_FEATURE_NAMES.iter().map(|s| s.to_string()));
            w.write_record(&header)?;
            write_feature_rows(&mut w, records, &kept, &rows)?;
        }
        FeatureSet::Learned => {
            let path = a
                .model
                .as_ref()
                .ok_or("--set learned needs --model with a learned bundle")?;
            let mut bundle = load_model(path)?;
            if let Some(t) = a.tnh_min {
                bundle.preprocessing.policy.tnh_min = t;
            }
            let codes = bundle.learned_codes(records)?;
            let width = bundle.sdae.as_ref().and_then(|m| m.output_dim()).unwrap_or(0);
            let mut header = vec!["timestamp".to_string(), "label".to_string()];
            header.extend((1..=width).map(|i| format!("f_{i:02}")));
            w.write_record(&header)?;
            write_feature_rows(&mut w, records, &codes.kept, &codes.rows)?;
        }
    }
    write_atomic(&a.out, &w.into_inner()?)?;
    Ok(())
}

fn run_evaluate(a: EvaluateArgs) -> CliResult {
    let mut cfg = load_config(&a.common)?;
    set(&mut cfg.eval.runs, a.runs);
    set(&mut cfg.eval.folds, a.folds);
    if let Some(s) = a.sdae_scope {
        cfg.eval.sdae_scope = match s {
            ScopeChoice::Global => SdaeScope::Global,
            ScopeChoice::PerFold => SdaeScope::PerFold,
        };
    }
    let data = read_dataset(&a.data)?;
    let pool = a.pool.as_deref().map(read_dataset).transpose()?;
    let sets: &[FeatureSet] = match a.features {
        FeatureChoice::Hand => &[FeatureSet::Hand],
        FeatureChoice::Learned => &[FeatureSet::Learned],
        FeatureChoice::Both => &[FeatureSet::Hand, FeatureSet::Learned],
    };
    let ev = evaluate(
        &data.records,
        pool.as_ref().map(|p| p.records.as_slice()),
        sets,
        &cfg,
    )?;
    fs::create_dir_all(&a.out).map_err(|e| format!("{}: {e}", a.out.display()))?;
    let mut report = Vec::new();
    write_report_csv(&ev.reports, &mut report)?;
    let mut summary = Vec::new();
    write_summary_csv(&ev.reports, &mut summary)?;
    let mut points = Vec::new();
    write_roc_points_csv(&ev.reports, &mut points)?;
    write_atomic(&a.out.join("report.csv"), &report)?;
    write_atomic(&a.out.join("summary.csv"), &summary)?;
    write_atomic(&a.out.join("roc_points.csv"), &points)?;
    write_atomic(&a.out.join("roc.svg"), roc_svg(&ev.reports).as_bytes())?;
    println!("{:<8} {:>16} {:>16}", "features", "AUC", "TPR@1%FPR");
    for r in &ev.reports {
        println!(
            "{:<8} {:>7.4} ± {:<6.4} {:>7.4} ± {:<6.4}",
            r.feature_set, r.auc_mean, r.auc_std, r.tpr_mean, r.tpr_std
        );
    }
    Ok(())
}

fn score(a: ScoreArgs) -> CliResult {
    let bundle = load_model(&a.model)?;
    let data = read_dataset(&a.data)?;
    let scores = bundle.score_records(&data.records)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["timestamp", "score", "label"])?;
    let mut skipped = 0usize;
    for (r, s) in data.records.iter().zip(&scores) {
        match s {
            Some(s) => w.write_record([r.timestamp.to_string(), s.to_string(), r.label.as_str().to_string()])?,
            None => skipped += 1,
        }
    }
    write_atomic(&a.out, &w.into_inner()?)?;
    if skipped > 0 {
        eprintln!("{skipped} record(s) filtered out (invalid or below the TNH threshold)");
    }
    Ok(())
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn load_config(c: &CommonArgs) -> CliResult<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &c.config {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        cfg.apply_kv(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    set(&mut cfg.seed, c.seed);
    set(&mut cfg.preprocessing.tnh_min, c.tnh_min);
    cfg.validate()?;
    Ok(cfg)
}

fn read_dataset(path: &Path) -> CliResult<Dataset> {
    load_csv(path, &CsvSchema::default()).map_err(|e| {
        let msg = e.to_string();
        let shown = path.display().to_string();
        if msg.contains(&shown) {
            msg.into()
        } else {
            format!("{shown}: {msg}").into()
        }
    })
}

fn write_feature_rows(
    w: &mut csv::Writer<Vec<u8>>,
    records: &[TcRecord],
    kept: &[usize],
    rows: &[Vec<f64>],
) -> CliResult {
    for (&i, row) in kept.iter().zip(rows) {
        let mut fields = vec![records[i].timestamp.to_string(), records[i].label.as_str().to_string()];
        fields.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&fields)?;
    }
    Ok(())
}
