//! Synthetic thermocouple-ring generator with localized fault injection.
//!
//! A healthy profile is a flat base temperature plus a smooth swirl pattern
//! with a random phase, plus independent sensor noise. A fault is a
//! circular Gaussian bump (cold or hot spot) centred on one can.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profiles::{Dataset, Label, TcRecord};
use crate::rng::{self, Stream};

/// 2015-01-01T00:00:00Z; generated records are one minute apart from here.
pub const START_TIMESTAMP: i64 = 1_420_070_400;
pub const SAMPLE_PERIOD_S: i64 = 60;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("fault center {center} out of range for {n_cans} cans")]
    CenterOutOfRange { center: usize, n_cans: usize },
    #[error("invalid simulator config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_cans: usize,
    pub base_temp: f64,
    pub swirl_amp: f64,
    pub sensor_noise_std: f64,
    /// Nominal load, MW. Each record draws `dwatt ~ N(nominal, dwatt_std²)`.
    pub dwatt_nominal: f64,
    pub dwatt_std: f64,
    pub n_normal: usize,
    pub n_fault: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    /// 5000 normal / 33 fault keeps the majority/minority ratio near 150.
    fn default() -> Self {
        Self {
            n_cans: 27,
            base_temp: 1000.0,
            swirl_amp: 8.0,
            sensor_noise_std: 3.0,
            dwatt_nominal: 180.0,
            dwatt_std: 2.0,
            n_normal: 5000,
            n_fault: 33,
            seed: 0,
        }
    }
}

impl SimConfig {
    /// 5000 normal / 100 fault, the size used for the hand-vs-learned
    /// comparison.
    pub fn desk_scale() -> Self {
        Self {
            n_fault: 100,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        if self.n_cans < 3 {
            return bad("n_cans must be at least 3");
        }
        let amps = [self.swirl_amp, self.sensor_noise_std, self.dwatt_std];
        if amps.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return bad("amplitudes must be finite and non-negative");
        }
        if !self.base_temp.is_finite() || !self.dwatt_nominal.is_finite() {
            return bad("base_temp and dwatt_nominal must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultKind {
    Cold,
    Hot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub center_can: usize,
    /// °F at the peak of the bump.
    pub depth: f64,
    /// Standard deviation of the bump in can units.
    pub width: f64,
    pub kind: FaultKind,
}

/// Distribution fault parameters are drawn from in [`gen_dataset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultDistribution {
    pub depth_min: f64,
    pub depth_max: f64,
    pub width_min: f64,
    pub width_max: f64,
    /// Probability that a fault is a cold spot; the rest are hot spots.
    pub cold_fraction: f64,
}

impl Default for FaultDistribution {
    fn default() -> Self {
        Self {
            depth_min: 20.0,
            depth_max: 40.0,
            width_min: 0.8,
            width_max: 2.0,
            cold_fraction: 1.0,
        }
    }
}

impl FaultDistribution {
    pub fn sample(&self, n_cans: usize, rng: &mut Stream) -> FaultSpec {
        let center_can = rng.random_range(0..n_cans);
        let depth = uniform(rng, self.depth_min, self.depth_max);
        let width = uniform(rng, self.width_min, self.width_max);
        let kind = if rng.random::<f64>() < self.cold_fraction {
            FaultKind::Cold
        } else {
            FaultKind::Hot
        };
        FaultSpec {
            center_can,
            depth,
            width,
            kind,
        }
    }
}

fn uniform(rng: &mut Stream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Distance between two cans around the ring.
pub fn circular_distance(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j) % n;
    d.min(n - d)
}

/// Bump height at every can for a unit-depth fault.
pub fn bump_shape(center: usize, width: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let d = circular_distance(i, center, n) as f64;
            (-d * d / (2.0 * width * width)).exp()
        })
        .collect()
}

/// One healthy record. The timestamp is left at 0.
pub fn gen_normal(cfg: &SimConfig, rng: &mut Stream) -> TcRecord {
    let n = cfg.n_cans;
    let phase = 2.0 * PI * rng.random::<f64>();
    let noise = Normal::new(0.0, cfg.sensor_noise_std).expect("validated std");
    let tc_temps = (0..n)
        .map(|i| {
            let swirl = cfg.swirl_amp * (2.0 * PI * i as f64 / n as f64 + phase).sin();
            cfg.base_temp + swirl + noise.sample(rng)
        })
        .collect();
    let tnh = uniform(rng, 95.0, 101.0);
    let dwatt = Normal::new(cfg.dwatt_nominal, cfg.dwatt_std)
        .expect("validated std")
        .sample(rng);
    TcRecord {
        timestamp: 0,
        tc_temps,
        dwatt,
        tnh,
        label: Label::Normal,
    }
}

/// Apply a localized hot or cold spot and relabel the record as an event.
pub fn inject_fault(record: &TcRecord, fault: &FaultSpec) -> Result<TcRecord, SimError> {
    let n = record.tc_temps.len();
    if fault.center_can >= n {
        return Err(SimError::CenterOutOfRange {
            center: fault.center_can,
            n_cans: n,
        });
    }
    let sign = match fault.kind {
        FaultKind::Cold => -1.0,
        FaultKind::Hot => 1.0,
    };
    let shape = bump_shape(fault.center_can, fault.width, n);
    let mut out = record.clone();
    for (t, s) in out.tc_temps.iter_mut().zip(shape) {
        *t += sign * fault.depth * s;
    }
    out.label = Label::Event;
    Ok(out)
}

/// Generate `n_normal` healthy and `n_fault` faulty records, shuffled, with
/// once-per-minute timestamps from [`START_TIMESTAMP`].
///
/// Stream consumption order: all normal records, then for each fault a base
/// record followed by its fault parameters, then the shuffle.
pub fn gen_dataset(cfg: &SimConfig, faults: &FaultDistribution) -> Result<Dataset, SimError> {
    cfg.validate()?;
    let mut rng = rng::stream(cfg.seed);
    let mut records = Vec::with_capacity(cfg.n_normal + cfg.n_fault);
    for _ in 0..cfg.n_normal {
        records.push(gen_normal(cfg, &mut rng));
    }
    for _ in 0..cfg.n_fault {
        let base = gen_normal(cfg, &mut rng);
        let spec = faults.sample(cfg.n_cans, &mut rng);
        records.push(inject_fault(&base, &spec)?);
    }
    records.shuffle(&mut rng);
    for (i, r) in records.iter_mut().enumerate() {
        r.timestamp = START_TIMESTAMP + SAMPLE_PERIOD_S * i as i64;
    }
    let provenance = format!(
        "simulated: seed={} n_cans={} n_normal={} n_fault={}",
        cfg.seed, cfg.n_cans, cfg.n_normal, cfg.n_fault
    );
    Ok(Dataset::new(records, cfg.n_cans, provenance).expect("generator keeps widths"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::to_csv_bytes;

    #[test]
    fn noiseless_profile_is_flat() {
        let cfg = SimConfig {
            swirl_amp: 0.0,
            sensor_noise_std: 0.0,
            ..SimConfig::default()
        };
        let r = gen_normal(&cfg, &mut rng::stream(3));
        assert!(r.tc_temps.iter().all(|t| *t == 1000.0));
        assert!(r.tnh >= 95.0 && r.tnh <= 101.0);
        assert_eq!(r.label, Label::Normal);
    }

    #[test]
    fn same_seed_same_record() {
        let cfg = SimConfig::default();
        let a = gen_normal(&cfg, &mut rng::stream(11));
        let b = gen_normal(&cfg, &mut rng::stream(11));
        assert_eq!(a, b);
    }

    #[test]
    fn noise_moment_per_can() {
        let cfg = SimConfig {
            swirl_amp: 0.0,
            ..SimConfig::default()
        };
        let mut rng = rng::stream(5);
        let n = 10_000;
        let mut sum = vec![0.0; cfg.n_cans];
        let mut sq = vec![0.0; cfg.n_cans];
        for _ in 0..n {
            let r = gen_normal(&cfg, &mut rng);
            for (i, t) in r.tc_temps.iter().enumerate() {
                sum[i] += t;
                sq[i] += t * t;
            }
        }
        for i in 0..cfg.n_cans {
            let mean = sum[i] / n as f64;
            let var = (sq[i] - n as f64 * mean * mean) / (n as f64 - 1.0);
            let sd = var.sqrt();
            assert!((2.8..=3.2).contains(&sd), "can {i}: sd {sd}");
        }
    }

    fn flat(n: usize) -> TcRecord {
        TcRecord {
            timestamp: 0,
            tc_temps: vec![1000.0; n],
            dwatt: 180.0,
            tnh: 100.0,
            label: Label::Normal,
        }
    }

    #[test]
    fn zero_depth_only_relabels() {
        let r = flat(27);
        let f = FaultSpec {
            center_can: 3,
            depth: 0.0,
            width: 1.5,
            kind: FaultKind::Cold,
        };
        let out = inject_fault(&r, &f).unwrap();
        assert_eq!(out.tc_temps, r.tc_temps);
        assert_eq!(out.label, Label::Event);
    }

    #[test]
    fn cold_peak_drops_by_depth() {
        let f = FaultSpec {
            center_can: 10,
            depth: 50.0,
            width: 1.0,
            kind: FaultKind::Cold,
        };
        let out = inject_fault(&flat(27), &f).unwrap();
        assert_eq!(out.tc_temps[10], 950.0);
    }

    #[test]
    fn heat_removed_matches_brute_force() {
        let n = 27;
        let f = FaultSpec {
            center_can: 25,
            depth: 17.0,
            width: 2.3,
            kind: FaultKind::Cold,
        };
        let out = inject_fault(&flat(n), &f).unwrap();
        let removed: f64 = out.tc_temps.iter().map(|t| 1000.0 - t).sum();
        let mut expected = 0.0;
        for i in 0..n {
            // explicit ring walk: shortest of the two directions
            let fwd = (i + n - 25) % n;
            let back = (25 + n - i) % n;
            let d = fwd.min(back) as f64;
            expected += 17.0 * (-d * d / (2.0 * 2.3 * 2.3)).exp();
        }
        assert!((removed - expected).abs() < 1e-9);
    }

    #[test]
    fn center_out_of_range() {
        let f = FaultSpec {
            center_can: 27,
            depth: 1.0,
            width: 1.0,
            kind: FaultKind::Hot,
        };
        assert!(matches!(
            inject_fault(&flat(27), &f),
            Err(SimError::CenterOutOfRange { .. })
        ));
    }

    #[test]
    fn dataset_counts() {
        let cfg = SimConfig {
            n_normal: 5000,
            n_fault: 100,
            seed: 1,
            ..SimConfig::default()
        };
        let ds = gen_dataset(&cfg, &FaultDistribution::default()).unwrap();
        assert_eq!(ds.len(), 5100);
        assert_eq!(ds.count_label(Label::Event), 100);
        assert_eq!(ds.n_tc, 27);
    }

    #[test]
    fn default_ratio_near_150() {
        let cfg = SimConfig::default();
        let ratio = cfg.n_normal as f64 / cfg.n_fault as f64;
        assert!((140.0..=160.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn dataset_bytes_deterministic() {
        let cfg = SimConfig {
            n_normal: 200,
            n_fault: 5,
            seed: 9,
            ..SimConfig::default()
        };
        let a = to_csv_bytes(&gen_dataset(&cfg, &FaultDistribution::default()).unwrap());
        let b = to_csv_bytes(&gen_dataset(&cfg, &FaultDistribution::default()).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = SimConfig {
            n_cans: 2,
            ..SimConfig::default()
        };
        assert!(gen_dataset(&cfg, &FaultDistribution::default()).is_err());
    }
}
