//! Classifier evaluation: ROC curves, exact AUC, and confusion matrices.
//!
//! The area under the ROC curve is computed with integer arithmetic — the
//! trapezoid numerator `Σ (TPₖ + TPₖ₊₁)·ΔFPₖ` over tie groups divided by
//! `2·P·N` — so it equals the Mann–Whitney pairwise statistic (ties counted
//! half) *exactly*, not just to rounding error.
//!
//! Labels are positive when greater than zero, which covers both the `{0,1}`
//! and `{-1,+1}` encodings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One operating point of a classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Fraction of negatives scored at or above this point's cutoff.
    pub false_positive_rate: f64,
    /// Fraction of positives scored at or above this point's cutoff.
    pub true_positive_rate: f64,
}

/// A full ROC sweep: the operating points from `(0,0)` to `(1,1)` and the
/// exact area under them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Points in threshold order (highest cutoff first), starting at `(0,0)`.
    pub points: Vec<RocPoint>,
    /// Area under the curve.
    pub auc: f64,
}

fn validate_scored_labels(scores: &[f64], labels: &[f64]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidDataset(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.is_empty() {
        return Err(Error::InvalidDataset("no scores to evaluate".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) || labels.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidDataset(
            "scores and labels must be finite".into(),
        ));
    }
    Ok(())
}

/// Sweep every threshold over `scores` and report the ROC curve.
///
/// # Errors
///
/// [`Error::InvalidDataset`] when the slices differ in length, are empty,
/// contain non-finite values, or only one class is present (the curve is
/// undefined without both).
pub fn roc_curve(scores: &[f64], labels: &[f64]) -> Result<RocCurve> {
    validate_scored_labels(scores, labels)?;
    let positives = labels.iter().filter(|&&label| label > 0.0).count() as u128;
    let negatives = labels.len() as u128 - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::InvalidDataset(
            "need at least one positive and one negative label".into(),
        ));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores validated finite")
            .then(a.cmp(&b))
    });

    let mut points = vec![RocPoint {
        false_positive_rate: 0.0,
        true_positive_rate: 0.0,
    }];
    let mut true_positives: u128 = 0;
    let mut false_positives: u128 = 0;
    let mut numerator: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        // One tie group: every index sharing this score moves together.
        let mut end = start;
        let mut group_positives: u128 = 0;
        let mut group_negatives: u128 = 0;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            if labels[order[end]] > 0.0 {
                group_positives += 1;
            } else {
                group_negatives += 1;
            }
            end += 1;
        }
        numerator += (2 * true_positives + group_positives) * group_negatives;
        true_positives += group_positives;
        false_positives += group_negatives;
        points.push(RocPoint {
            false_positive_rate: false_positives as f64 / negatives as f64,
            true_positive_rate: true_positives as f64 / positives as f64,
        });
        start = end;
    }

    Ok(RocCurve {
        points,
        auc: numerator as f64 / (2 * positives * negatives) as f64,
    })
}

/// Area under the ROC curve. See [`roc_curve`] for the exactness guarantee
/// and error conditions.
pub fn roc_auc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    Ok(roc_curve(scores, labels)?.auc)
}

/// Counts of the four prediction outcomes at a fixed threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

impl ConfusionMatrix {
    /// Total predictions counted.
    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }

    /// Fraction of predictions that were correct.
    pub fn accuracy(&self) -> f64 {
        (self.true_positives + self.true_negatives) as f64 / self.total() as f64
    }
}

/// Tally prediction outcomes, predicting positive when the score is at or
/// above `threshold`.
///
/// # Errors
///
/// [`Error::InvalidDataset`] on length mismatch, empty input, or non-finite
/// values (single-class label sets are fine here, unlike [`roc_curve`]).
pub fn confusion_at_threshold(
    scores: &[f64],
    labels: &[f64],
    threshold: f64,
) -> Result<ConfusionMatrix> {
    validate_scored_labels(scores, labels)?;
    let mut matrix = ConfusionMatrix {
        true_positives: 0,
        false_positives: 0,
        true_negatives: 0,
        false_negatives: 0,
    };
    for (&score, &label) in scores.iter().zip(labels) {
        let predicted_positive = score >= threshold;
        let actually_positive = label > 0.0;
        match (predicted_positive, actually_positive) {
            (true, true) => matrix.true_positives += 1,
            (true, false) => matrix.false_positives += 1,
            (false, false) => matrix.true_negatives += 1,
            (false, true) => matrix.false_negatives += 1,
        }
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Mann–Whitney statistic computed pair by pair: the fraction of
    /// (positive, negative) pairs ranked correctly, ties counting half.
    fn pairwise_auc(scores: &[f64], labels: &[f64]) -> f64 {
        let mut wins: u128 = 0;
        let mut ties: u128 = 0;
        let mut pairs: u128 = 0;
        for (i, &positive_score) in scores.iter().enumerate() {
            if labels[i] <= 0.0 {
                continue;
            }
            for (j, &negative_score) in scores.iter().enumerate() {
                if labels[j] > 0.0 {
                    continue;
                }
                pairs += 1;
                if positive_score > negative_score {
                    wins += 1;
                } else if positive_score == negative_score {
                    ties += 1;
                }
            }
        }
        (2 * wins + ties) as f64 / (2 * pairs) as f64
    }

    #[test]
    fn perfect_ranking_scores_one() {
        let scores = [0.9, 0.8, 0.2, 0.1];
        let labels = [1.0, 1.0, 0.0, 0.0];
        assert_eq!(roc_auc(&scores, &labels).unwrap(), 1.0);
        let curve = roc_curve(&scores, &labels).unwrap();
        assert_eq!(
            curve.points.first().unwrap(),
            &RocPoint {
                false_positive_rate: 0.0,
                true_positive_rate: 0.0
            }
        );
        assert_eq!(
            curve.points.last().unwrap(),
            &RocPoint {
                false_positive_rate: 1.0,
                true_positive_rate: 1.0
            }
        );
    }

    #[test]
    fn reversed_ranking_scores_zero() {
        let scores = [0.1, 0.2, 0.8, 0.9];
        let labels = [1.0, 1.0, -1.0, -1.0];
        assert_eq!(roc_auc(&scores, &labels).unwrap(), 0.0);
    }

    #[test]
    fn constant_scores_give_exactly_half() {
        let scores = [0.5; 6];
        let labels = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        assert_eq!(roc_auc(&scores, &labels).unwrap(), 0.5);
    }

    #[test]
    fn matches_pairwise_oracle_exactly_including_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for size in [2usize, 3, 10, 57, 200] {
            // Quantized scores force plenty of ties; one of each class is
            // pinned so the curve is always defined.
            let mut scores = vec![0.3, 0.7];
            let mut labels = vec![1.0, -1.0];
            for _ in 2..size.max(2) {
                scores.push(rng.gen_range(0..10) as f64 / 10.0);
                labels.push(if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
            }
            let fast = roc_auc(&scores, &labels).unwrap();
            let oracle = pairwise_auc(&scores, &labels);
            assert_eq!(fast, oracle, "size {size}: {fast} != {oracle}");
        }
    }

    #[test]
    fn curve_points_are_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let scores: Vec<f64> = (0..40).map(|_| rng.gen_range(0..8) as f64).collect();
        let labels: Vec<f64> = (0..40)
            .map(|i| if i % 3 == 0 { 1.0 } else { 0.0 })
            .collect();
        let curve = roc_curve(&scores, &labels).unwrap();
        for window in curve.points.windows(2) {
            assert!(window[1].false_positive_rate >= window[0].false_positive_rate);
            assert!(window[1].true_positive_rate >= window[0].true_positive_rate);
        }
    }

    #[test]
    fn rejects_degenerate_input() {
        // Single class.
        assert!(roc_auc(&[0.1, 0.2], &[1.0, 1.0]).is_err());
        assert!(roc_auc(&[0.1, 0.2], &[0.0, 0.0]).is_err());
        // Length mismatch, empty, non-finite.
        assert!(roc_auc(&[0.1], &[1.0, 0.0]).is_err());
        assert!(roc_auc(&[], &[]).is_err());
        assert!(roc_auc(&[f64::NAN, 0.2], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn confusion_counts_and_accuracy() {
        let scores = [0.9, 0.6, 0.5, 0.4, 0.1];
        let labels = [1.0, 0.0, 1.0, 1.0, 0.0];
        let matrix = confusion_at_threshold(&scores, &labels, 0.5).unwrap();
        // At 0.5 (inclusive): predictions are +,+,+,-,-.
        assert_eq!(
            matrix,
            ConfusionMatrix {
                true_positives: 2,
                false_positives: 1,
                true_negatives: 1,
                false_negatives: 1,
            }
        );
        assert_eq!(matrix.total(), 5);
        assert_eq!(matrix.accuracy(), 0.6);
        // Single-class labels are fine for a confusion matrix.
        assert!(confusion_at_threshold(&[0.9], &[1.0], 0.5).is_ok());
    }
}
