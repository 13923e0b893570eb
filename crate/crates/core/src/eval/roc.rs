use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC staircase from (0,0) to (1,1). Tied scores form diagonal segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// Build from explicit points, checking that both coordinates are
    /// non-decreasing, inside [0, 1], and that the endpoints are present.
    pub fn from_points(points: Vec<RocPoint>) -> Result<Self, EvalError> {
        let in_range = |p: &RocPoint| (0.0..=1.0).contains(&p.fpr) && (0.0..=1.0).contains(&p.tpr);
        let ok = points.len() >= 2
            && points.iter().all(in_range)
            && points.windows(2).all(|w| w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr)
            && points[0] == RocPoint { fpr: 0.0, tpr: 0.0 }
            && points[points.len() - 1] == RocPoint { fpr: 1.0, tpr: 1.0 };
        if ok {
            Ok(Self { points })
        } else {
            Err(EvalError::InvalidCurve)
        }
    }

    pub fn auc(&self) -> f64 {
        auc(self)
    }

    pub fn tpr_at_fpr(&self, fpr_target: f64) -> f64 {
        tpr_at_fpr(self, fpr_target)
    }
}

/// Sweep thresholds over the distinct scores in descending order; `labels`
/// are 1 for positive (event) and 0 for negative.
pub fn roc(scores: &[f64], labels: &[u8]) -> Result<RocCurve, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(EvalError::NonFiniteScore);
    }
    if let Some(&l) = labels.iter().find(|l| **l > 1) {
        return Err(EvalError::BadLabel(l));
    }
    let pos = labels.iter().filter(|l| **l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    Ok(RocCurve { points })
}

/// Trapezoidal area under the curve.
pub fn auc(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
        .sum()
}

/// TPR at a false-positive rate, interpolating linearly between the
/// bracketing vertices. Where the curve rises vertically at exactly
/// `fpr_target`, the highest vertex is used.
pub fn tpr_at_fpr(curve: &RocCurve, fpr_target: f64) -> f64 {
    let target = fpr_target.clamp(0.0, 1.0);
    let pts = &curve.points;
    if let Some(best) = pts
        .iter()
        .filter(|p| p.fpr == target)
        .map(|p| p.tpr)
        .reduce(f64::max)
    {
        return best;
    }
    let right = pts.iter().position(|p| p.fpr > target).unwrap_or(pts.len() - 1);
    let left = right.saturating_sub(1);
    let (a, b) = (pts[left], pts[right]);
    if b.fpr == a.fpr {
        return b.tpr;
    }
    a.tpr + (b.tpr - a.tpr) * (target - a.fpr) / (b.fpr - a.fpr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(fpr: f64, tpr: f64) -> RocPoint {
        RocPoint { fpr, tpr }
    }

    #[test]
    fn perfect_classifier() {
        let c = roc(&[0.9, 0.8, 0.2, 0.1], &[1, 1, 0, 0]).unwrap();
        assert!(c.points.contains(&p(0.0, 1.0)));
        assert_eq!(c.auc(), 1.0);
        assert_eq!(c.tpr_at_fpr(0.01), 1.0);
    }

    #[test]
    fn reversed_classifier() {
        let c = roc(&[0.1, 0.2, 0.8, 0.9], &[1, 1, 0, 0]).unwrap();
        assert_eq!(c.auc(), 0.0);
    }

    #[test]
    fn all_ties_are_diagonal() {
        let c = roc(&[0.5; 6], &[1, 0, 1, 0, 0, 0]).unwrap();
        assert_eq!(c.points, vec![p(0.0, 0.0), p(1.0, 1.0)]);
        assert_eq!(c.auc(), 0.5);
        assert!((c.tpr_at_fpr(0.01) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn eight_sample_brute_force() {
        let scores = [0.9, 0.8, 0.8, 0.7, 0.5, 0.5, 0.3, 0.1];
        let labels = [1, 1, 0, 1, 0, 1, 0, 0];
        let c = roc(&scores, &labels).unwrap();
        // every distinct threshold, predict positive when score >= threshold
        let mut distinct: Vec<f64> = scores.to_vec();
        distinct.dedup();
        let mut expected = vec![p(0.0, 0.0)];
        for th in distinct {
            let (mut tp, mut fp) = (0, 0);
            for (s, l) in scores.iter().zip(labels) {
                if *s >= th {
                    if l == 1 {
                        tp += 1
                    } else {
                        fp += 1
                    }
                }
            }
            expected.push(p(fp as f64 / 4.0, tp as f64 / 4.0));
        }
        assert_eq!(c.points, expected);
    }

    #[test]
    fn interpolates_between_vertices() {
        let c = RocCurve::from_points(vec![p(0.0, 0.0), p(0.2, 0.6), p(1.0, 1.0)]).unwrap();
        // 0.6 + (1.0 - 0.6) * (0.5 - 0.2) / 0.8 = 0.75
        assert!((c.tpr_at_fpr(0.5) - 0.75).abs() < 1e-15);
        assert!((c.tpr_at_fpr(0.1) - 0.3).abs() < 1e-15);
        assert_eq!(c.tpr_at_fpr(0.2), 0.6);
        assert_eq!(c.tpr_at_fpr(1.0), 1.0);
    }

    #[test]
    fn errors() {
        assert_eq!(roc(&[0.1, 0.2], &[1, 1]).unwrap_err(), EvalError::SingleClass);
        assert_eq!(roc(&[f64::NAN, 0.2], &[1, 0]).unwrap_err(), EvalError::NonFiniteScore);
        assert!(roc(&[0.1], &[1, 0]).is_err());
        assert!(RocCurve::from_points(vec![p(0.0, 0.0), p(0.5, 0.4), p(0.4, 1.0), p(1.0, 1.0)])
            .is_err());
    }
}
