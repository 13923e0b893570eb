//! The twelve handcrafted profile statistics used as the baseline feature
//! set.
//!
//! Load and speed pass through raw; every other statistic is computed on
//! the mean-normalized profile, treating the thermocouples as a ring.

use thiserror::Error;

use crate::profiles::{mean_normalize, ProfileError, TcProfile, TcRecord};

pub const N_HAND_FEATURES: usize = 12;

/// Column names, in feature order.
pub const HAND_FEATURE_NAMES: [&str; N_HAND_FEATURES] = [
    "DWATT", "TNH", "MAX", "MEN", "STD", "MED", "DIF", "ZR", "KR", "SK", "M3S", "M3M",
];

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("window length {0} must be odd")]
    EvenWindow(usize),
    #[error("window length {k} exceeds profile length {n}")]
    WindowTooLong { k: usize, n: usize },
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandFeatures {
    pub values: [f64; N_HAND_FEATURES],
}

impl HandFeatures {
    pub fn get(&self, name: &str) -> Option<f64> {
        HAND_FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values[i])
    }
}

pub fn compute_hand_features(record: &TcRecord) -> Result<HandFeatures, FeatureError> {
    let profile = mean_normalize(&record.tc_temps)?;
    let v = profile.values();
    let n = v.len() as f64;

    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = v.iter().sum::<f64>() / n;
    let m2 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = v.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let m4 = v.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let (kurtosis, skewness) = if m2 > 0.0 {
        (m4 / (m2 * m2), m3 / m2.powf(1.5))
    } else {
        (0.0, 0.0)
    };
    let positive = v.iter().filter(|x| **x > 0.0).count() as f64;
    let negative = v.iter().filter(|x| **x < 0.0).count() as f64;

    let windows = circular_windows(&profile, 3)?;
    let max_sum = windows
        .iter()
        .map(|w| w.iter().sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let max_median = windows
        .iter()
        .map(|w| median(w))
        .fold(f64::NEG_INFINITY, f64::max);

    Ok(HandFeatures {
        values: [
            record.dwatt,
            record.tnh,
            max,
            mean,
            m2.sqrt(),
            median(v),
            positive - negative,
            zero_crossings(&profile) as f64,
            kurtosis,
            skewness,
            max_sum,
            max_median,
        ],
    })
}

/// All `n` circular windows of odd length `k`, window `j` centred on entry
/// `j`.
pub fn circular_windows(profile: &TcProfile, k: usize) -> Result<Vec<Vec<f64>>, FeatureError> {
    let v = profile.values();
    let n = v.len();
    if k % 2 == 0 {
        return Err(FeatureError::EvenWindow(k));
    }
    if k > n {
        return Err(FeatureError::WindowTooLong { k, n });
    }
    let half = k / 2;
    Ok((0..n)
        .map(|j| (0..k).map(|o| v[(j + n - half + o) % n]).collect())
        .collect())
}

/// Adjacent pairs around the ring with strictly opposite signs. Zeros never
/// count.
pub fn zero_crossings(profile: &TcProfile) -> usize {
    let v = profile.values();
    let n = v.len();
    (0..n)
        .filter(|&i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0)
        })
        .count()
}

/// Median; the mean of the two central order statistics for even lengths.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::Label;

    fn record(temps: Vec<f64>) -> TcRecord {
        TcRecord {
            timestamp: 0,
            tc_temps: temps,
            dwatt: 181.5,
            tnh: 99.5,
            label: Label::Normal,
        }
    }

    #[test]
    fn constant_profile_all_zero() {
        let f = compute_hand_features(&record(vec![987.25; 27])).unwrap();
        assert_eq!(f.values[0], 181.5);
        assert_eq!(f.values[1], 99.5);
        assert!(f.values[2..].iter().all(|x| *x == 0.0), "{:?}", f.values);
    }

    #[test]
    fn alternating_profile() {
        // +1,-1,... over 26 cans then one 0; mean is already 0.
        let mut temps: Vec<f64> = (0..26).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        temps.push(0.0);
        let f = compute_hand_features(&record(temps.clone())).unwrap();
        assert_eq!(f.get("DIF"), Some(0.0));
        // walk: 25 sign flips inside the run, then -1 -> 0 and 0 -> +1 don't count
        let mut walk = 0;
        for i in 0..27 {
            let (a, b) = (temps[i], temps[(i + 1) % 27]);
            if a * b < 0.0 {
                walk += 1;
            }
        }
        assert_eq!(walk, 25);
        assert_eq!(f.get("ZR"), Some(walk as f64));
    }

    #[test]
    fn three_point_peaks() {
        // Adjacent 5,4,3 with the rest small; subtract nothing since we pass
        // a zero-mean profile directly.
        let mut v = vec![0.0; 27];
        v[10] = 5.0;
        v[11] = 4.0;
        v[12] = 3.0;
        let rest = -(12.0) / 24.0;
        for (i, x) in v.iter_mut().enumerate() {
            if !(10..=12).contains(&i) {
                *x = rest;
            }
        }
        let f = compute_hand_features(&record(v.clone())).unwrap();
        let mut best_sum = f64::NEG_INFINITY;
        let mut best_med = f64::NEG_INFINITY;
        for j in 0..27 {
            let w = [v[(j + 26) % 27], v[j], v[(j + 1) % 27]];
            best_sum = best_sum.max(w.iter().sum());
            let mut s = w;
            s.sort_by(f64::total_cmp);
            best_med = best_med.max(s[1]);
        }
        assert!((best_sum - 12.0).abs() < 1e-12);
        assert!((best_med - 4.0).abs() < 1e-12);
        assert!((f.get("M3S").unwrap() - 12.0).abs() < 1e-12);
        assert!((f.get("M3M").unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn full_cover_windows() {
        let p = TcProfile::from_normalized(vec![1.0, 2.0, 3.0]);
        let w = circular_windows(&p, 3).unwrap();
        assert_eq!(w, vec![vec![3.0, 1.0, 2.0], vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 1.0]]);
    }

    #[test]
    fn five_windows() {
        let p = TcProfile::from_normalized(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let w = circular_windows(&p, 3).unwrap();
        assert_eq!(
            w,
            vec![
                vec![5.0, 1.0, 2.0],
                vec![1.0, 2.0, 3.0],
                vec![2.0, 3.0, 4.0],
                vec![3.0, 4.0, 5.0],
                vec![4.0, 5.0, 1.0],
            ]
        );
        assert_eq!(circular_windows(&p, 5).unwrap().len(), 5);
    }

    #[test]
    fn window_errors() {
        let p = TcProfile::from_normalized(vec![1.0, 2.0, 3.0]);
        assert!(matches!(circular_windows(&p, 2), Err(FeatureError::EvenWindow(2))));
        assert!(circular_windows(&p, 5).is_err());
    }

    #[test]
    fn crossing_cases() {
        assert_eq!(zero_crossings(&TcProfile::from_normalized(vec![0.0; 5])), 0);
        assert_eq!(zero_crossings(&TcProfile::from_normalized(vec![1.0, -1.0])), 2);
        assert_eq!(
            zero_crossings(&TcProfile::from_normalized(vec![1.0, 0.0, -1.0, 0.0])),
            0
        );
    }

    #[test]
    fn two_point_kurtosis_and_symmetric_skew() {
        let f = compute_hand_features(&record(vec![3.0, -3.0, 3.0, -3.0])).unwrap();
        assert!((f.get("KR").unwrap() - 1.0).abs() < 1e-12);
        assert!(f.get("SK").unwrap().abs() < 1e-12);
        let f = compute_hand_features(&record(vec![-2.0, 5.0, 0.0, -5.0, 2.0])).unwrap();
        assert!(f.get("SK").unwrap().abs() < 1e-12);
    }

    #[test]
    fn even_median() {
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median(&[7.0]), 7.0);
    }
}
