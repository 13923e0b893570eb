//! Record filtering, mean normalization and per-channel min-max scaling.

use serde::{Deserialize, Serialize};

use super::config::PreprocessPolicy;
use super::PipelineError;
use crate::profiles::{filter_records, mean_normalize, TcRecord};

const ROUNDING_RANGE: f64 = 1e-12;

/// Per-channel min/max fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStats {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl ScalingStats {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, PipelineError> {
        let width = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| PipelineError::Data("cannot fit scaling on zero rows".into()))?;
        let mut mins = vec![f64::INFINITY; width];
        let mut maxs = vec![f64::NEG_INFINITY; width];
        for r in rows {
            if r.len() != width {
                return Err(PipelineError::Data("ragged rows".into()));
            }
            for (j, v) in r.iter().enumerate() {
                mins[j] = mins[j].min(*v);
                maxs[j] = maxs[j].max(*v);
            }
        }
        Ok(Self { mins, maxs })
    }

    pub fn width(&self) -> usize {
        self.mins.len()
    }

    /// Map into [0, 1], clamping values outside the fitted range. Channels
    /// whose fitted range is zero up to rounding map to 0.5, so a feature
    /// that is constant by construction is not stretched into noise.
    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>, PipelineError> {
        if row.len() != self.width() {
            return Err(PipelineError::Data(format!(
                "row has {} channels, scaling fitted on {}",
                row.len(),
                self.width()
            )));
        }
        Ok(row
            .iter()
            .zip(self.mins.iter().zip(&self.maxs))
            .map(|(v, (lo, hi))| {
                let range = hi - lo;
                if range > ROUNDING_RANGE * (1.0 + lo.abs().max(hi.abs())) {
                    ((v - lo) / range).clamp(0.0, 1.0)
                } else {
                    0.5
                }
            })
            .collect())
    }
}

/// Feature-ready rows plus the scaling statistics that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessed {
    pub rows: Vec<Vec<f64>>,
    /// Index into the input records of each row.
    pub kept: Vec<usize>,
    pub stats: Option<ScalingStats>,
}

/// Indices of the records that pass the validity and part-load filter.
pub fn kept_indices(records: &[TcRecord], tnh_min: f64) -> Vec<usize> {
    records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.tnh >= tnh_min && r.is_valid())
        .map(|(i, _)| i)
        .collect()
}

/// Filter, mean-normalize and (per policy) rescale.
///
/// With `fitted = None` the scaling is fitted on these records, which must
/// therefore be training data; anything scored later passes the returned
/// stats back in.
pub fn preprocess(
    records: &[TcRecord],
    policy: &PreprocessPolicy,
    fitted: Option<&ScalingStats>,
) -> Result<Preprocessed, PipelineError> {
    let kept = kept_indices(records, policy.tnh_min);
    debug_assert_eq!(kept.len(), filter_records(records, policy.tnh_min).len());
    let normalized = kept
        .iter()
        .map(|&i| mean_normalize(&records[i].tc_temps).map(|p| p.into_values()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| PipelineError::Data(e.to_string()))?;
    if !policy.rescale {
        return Ok(Preprocessed {
            rows: normalized,
            kept,
            stats: None,
        });
    }
    let stats = match fitted {
        Some(s) => s.clone(),
        None => ScalingStats::fit(&normalized)?,
    };
    let rows = normalized
        .iter()
        .map(|r| stats.apply(r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Preprocessed {
        rows,
        kept,
        stats: Some(stats),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::Label;

    fn rec(tnh: f64, temps: Vec<f64>) -> TcRecord {
        TcRecord {
            timestamp: 0,
            tc_temps: temps,
            dwatt: 180.0,
            tnh,
            label: Label::Normal,
        }
    }

    #[test]
    fn training_rows_in_unit_box() {
        let recs = vec![
            rec(99.0, vec![1000.0, 1010.0, 990.0]),
            rec(99.0, vec![1005.0, 995.0, 1000.0]),
            rec(90.0, vec![0.0, 2000.0, 1000.0]),
            rec(99.0, vec![1002.0, 1001.0, 997.0]),
        ];
        let p = preprocess(&recs, &PreprocessPolicy::default(), None).unwrap();
        assert_eq!(p.kept, vec![0, 1, 3]);
        assert!(p.rows.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        let s = p.stats.unwrap();
        assert_eq!(s.width(), 3);
    }

    #[test]
    fn out_of_range_test_values_clamped() {
        let s = ScalingStats {
            mins: vec![-1.0, 0.0],
            maxs: vec![1.0, 0.0],
        };
        assert_eq!(s.apply(&[5.0, 3.0]).unwrap(), vec![1.0, 0.5]);
        assert_eq!(s.apply(&[-5.0, -3.0]).unwrap(), vec![0.0, 0.5]);
        assert_eq!(s.apply(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
        let noise = ScalingStats {
            mins: vec![-2.5e-14],
            maxs: vec![3.1e-14],
        };
        assert_eq!(noise.apply(&[1e-14]).unwrap(), vec![0.5]);
        assert!(s.apply(&[0.0]).is_err());
    }

    #[test]
    fn fitted_stats_reused_verbatim() {
        let train = vec![rec(99.0, vec![1000.0, 1010.0, 990.0]), rec(99.0, vec![1000.0, 990.0, 1010.0])];
        let test = vec![rec(99.0, vec![1000.0, 1030.0, 970.0])];
        let fit = preprocess(&train, &PreprocessPolicy::default(), None).unwrap();
        let stats = fit.stats.unwrap();
        let applied = preprocess(&test, &PreprocessPolicy::default(), Some(&stats)).unwrap();
        assert_eq!(applied.stats.as_ref(), Some(&stats));
        assert_eq!(applied.rows[0], vec![0.5, 1.0, 0.0]);
    }

    #[test]
    fn fitting_on_nothing_fails() {
        let recs = vec![rec(50.0, vec![1.0, 2.0, 3.0])];
        assert!(preprocess(&recs, &PreprocessPolicy::default(), None).is_err());
    }
}
