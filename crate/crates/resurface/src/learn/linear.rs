//! L1-penalized logistic regression by proximal gradient descent.
//!
//! Minimizes `Σᵢ log(1 + exp(-yᵢ(xᵢ·β + b))) + λ‖β‖₁` over coefficients `β`
//! and an unpenalized intercept `b`. Each iteration takes a gradient step on
//! the smooth loss and applies the soft-threshold operator, which sets
//! coefficients to exactly zero rather than merely shrinking them; a
//! backtracking line search on the standard majorization condition keeps the
//! objective monotonically nonincreasing without needing a Lipschitz
//! constant up front.
//!
//! [`logistic_loss`] and [`logistic_loss_gradient`] expose the smooth part so
//! the gradient can be checked against finite differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{dot, log1p_exp, sigmoid, Dataset};

/// Sparse linear classifier: `P(y = +1 | x) = sigmoid(coefficients·x + intercept)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// One weight per feature; exact zeros mark pruned features.
    pub coefficients: Vec<f64>,
    /// Unpenalized bias term.
    pub intercept: f64,
}

impl LinearModel {
    /// Raw score `coefficients·features + intercept`.
    ///
    /// # Panics
    ///
    /// When `features` has a different width than the model.
    pub fn decision(&self, features: &[f64]) -> f64 {
        assert_eq!(
            features.len(),
            self.coefficients.len(),
            "feature width {} does not match model width {}",
            features.len(),
            self.coefficients.len()
        );
        dot(&self.coefficients, features) + self.intercept
    }

    /// `P(y = +1 | features)`.
    pub fn predict_probability(&self, features: &[f64]) -> f64 {
        sigmoid(self.decision(features))
    }

    /// Number of coefficients that are not exactly zero.
    pub fn nonzero_count(&self) -> usize {
        self.coefficients.iter().filter(|c| **c != 0.0).count()
    }
}

/// Summed logistic loss `Σᵢ log(1 + exp(-yᵢ zᵢ))` — the smooth part of the
/// training objective, without the penalty.
///
/// # Panics
///
/// When `coefficients` has a different width than the dataset.
pub fn logistic_loss(data: &Dataset, coefficients: &[f64], intercept: f64) -> f64 {
    assert_eq!(coefficients.len(), data.width(), "coefficient width mismatch");
    data.features()
        .iter()
        .zip(data.labels())
        .map(|(row, &label)| log1p_exp(-label * (dot(coefficients, row) + intercept)))
        .sum()
}

/// The full training objective: [`logistic_loss`] plus `λ‖β‖₁`.
pub fn logistic_objective(
    data: &Dataset,
    coefficients: &[f64],
    intercept: f64,
    lambda: f64,
) -> f64 {
    logistic_loss(data, coefficients, intercept) + lambda * l1_norm(coefficients)
}

/// Gradient of [`logistic_loss`]: the coefficient partials and the intercept
/// partial.
///
/// # Panics
///
/// When `coefficients` has a different width than the dataset.
pub fn logistic_loss_gradient(
    data: &Dataset,
    coefficients: &[f64],
    intercept: f64,
) -> (Vec<f64>, f64) {
    assert_eq!(coefficients.len(), data.width(), "coefficient width mismatch");
    let mut gradient = vec![0.0; coefficients.len()];
    let mut gradient_intercept = 0.0;
    for (row, &label) in data.features().iter().zip(data.labels()) {
        let score = dot(coefficients, row) + intercept;
        let residual = -label * sigmoid(-label * score);
        for (partial, &feature) in gradient.iter_mut().zip(row) {
            *partial += residual * feature;
        }
        gradient_intercept += residual;
    }
    (gradient, gradient_intercept)
}

fn l1_norm(values: &[f64]) -> f64 {
    values.iter().map(|v| v.abs()).sum()
}

fn soft_threshold(value: f64, threshold: f64) -> f64 {
    if value > threshold {
        value - threshold
    } else if value < -threshold {
        value + threshold
    } else {
        0.0
    }
}

const MAX_ITERATIONS: usize = 20_000;
const PARAMETER_TOLERANCE: f64 = 1e-6;
const MIN_STEP: f64 = 1e-18;

/// Fit an L1-penalized logistic model. See the module docs for the
/// objective; `lambda` scales the penalty and zero disables it.
///
/// # Errors
///
/// [`Error::InvalidArgument`] when `lambda` is negative or non-finite.
pub fn train_l1_logistic(data: &Dataset, lambda: f64) -> Result<LinearModel> {
    Ok(train_l1_logistic_traced(data, lambda)?.0)
}

/// [`train_l1_logistic`], additionally returning the objective value at the
/// start and after every accepted step. The trace is nonincreasing.
pub fn train_l1_logistic_traced(data: &Dataset, lambda: f64) -> Result<(LinearModel, Vec<f64>)> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "penalty weight must be finite and non-negative, got {lambda}"
        )));
    }
    let mut coefficients = vec![0.0; data.width()];
    let mut intercept = 0.0;
    let mut step = 1.0;
    let mut trace = vec![logistic_objective(data, &coefficients, intercept, lambda)];

    for _ in 0..MAX_ITERATIONS {
        let loss_here = logistic_loss(data, &coefficients, intercept);
        let (gradient, gradient_intercept) = logistic_loss_gradient(data, &coefficients, intercept);

        // Backtrack until the smooth loss is below its quadratic majorizer at
        // the proximal step; this is what makes the objective monotone.
        let (next_coefficients, next_intercept) = loop {
            let candidate: Vec<f64> = coefficients
                .iter()
                .zip(&gradient)
                .map(|(&c, &g)| soft_threshold(c - step * g, step * lambda))
                .collect();
            let candidate_intercept = intercept - step * gradient_intercept;

            let mut linear_term = 0.0;
            let mut squared_distance = 0.0;
            for ((&new, &old), &g) in candidate.iter().zip(&coefficients).zip(&gradient) {
                let delta = new - old;
                linear_term += g * delta;
                squared_distance += delta * delta;
            }
            let intercept_delta = candidate_intercept - intercept;
            linear_term += gradient_intercept * intercept_delta;
            squared_distance += intercept_delta * intercept_delta;

            let majorizer = loss_here + linear_term + squared_distance / (2.0 * step);
            let candidate_loss = logistic_loss(data, &candidate, candidate_intercept);
            if candidate_loss <= majorizer + 1e-12 || step <= MIN_STEP {
                break (candidate, candidate_intercept);
            }
            step *= 0.5;
        };

        let movement = next_coefficients
            .iter()
            .zip(&coefficients)
            .map(|(&new, &old)| (new - old).abs())
            .fold((next_intercept - intercept).abs(), f64::max);

        coefficients = next_coefficients;
        intercept = next_intercept;
        trace.push(logistic_objective(data, &coefficients, intercept, lambda));

        if movement < PARAMETER_TOLERANCE {
            break;
        }
        // Let the step grow back so one early flat stretch does not pin the
        // whole run to a tiny step.
        step = (step * 2.0).min(1e6);
    }

    Ok((
        LinearModel {
            coefficients,
            intercept,
        },
        trace,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Linearly separable two-feature data: the label is the sign of the
    /// first feature; the second is noise.
    fn separable_dataset(rows: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut features = Vec::with_capacity(rows);
        let mut labels = Vec::with_capacity(rows);
        for _ in 0..rows {
            let side: f64 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let informative = side * rng.gen_range(0.5..2.0);
            let noise = rng.gen_range(-1.0..1.0);
            features.push(vec![informative, noise]);
            labels.push(side);
        }
        Dataset::new(features, labels).unwrap()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let data = separable_dataset(24, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let coefficients: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let intercept = rng.gen_range(-1.0..1.0);
            let (gradient, gradient_intercept) =
                logistic_loss_gradient(&data, &coefficients, intercept);

            let h = 1e-6;
            for j in 0..coefficients.len() {
                let mut up = coefficients.clone();
                let mut down = coefficients.clone();
                up[j] += h;
                down[j] -= h;
                let estimate = (logistic_loss(&data, &up, intercept)
                    - logistic_loss(&data, &down, intercept))
                    / (2.0 * h);
                assert_relative_eq!(gradient[j], estimate, max_relative = 1e-5, epsilon = 1e-8);
            }
            let estimate = (logistic_loss(&data, &coefficients, intercept + h)
                - logistic_loss(&data, &coefficients, intercept - h))
                / (2.0 * h);
            assert_relative_eq!(
                gradient_intercept,
                estimate,
                max_relative = 1e-5,
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn separable_data_trains_to_high_accuracy() {
        let data = separable_dataset(80, 3);
        let model = train_l1_logistic(&data, 0.01).unwrap();
        let correct = data
            .features()
            .iter()
            .zip(data.labels())
            .filter(|(row, &label)| {
                let predicted = if model.predict_probability(row) >= 0.5 {
                    1.0
                } else {
                    -1.0
                };
                predicted == label
            })
            .count();
        assert!(
            correct as f64 / data.len() as f64 >= 0.95,
            "only {correct}/{} correct",
            data.len()
        );
        // The informative feature dominates and points the right way.
        assert!(model.coefficients[0] > 0.0);
        assert!(model.coefficients[0] > model.coefficients[1].abs());
    }

    #[test]
    fn objective_trace_is_monotone() {
        let data = separable_dataset(60, 4);
        let (_, trace) = train_l1_logistic_traced(&data, 0.1).unwrap();
        assert!(trace.len() >= 2);
        for window in trace.windows(2) {
            assert!(
                window[1] <= window[0] + 1e-9,
                "objective rose from {} to {}",
                window[0],
                window[1]
            );
        }
    }

    #[test]
    fn huge_penalty_zeroes_every_coefficient() {
        let data = separable_dataset(20, 5);
        let model = train_l1_logistic(&data, 1e6).unwrap();
        assert!(model.coefficients.iter().all(|&c| c == 0.0));
        assert_eq!(model.nonzero_count(), 0);
        assert!(model.intercept.is_finite());
    }

    #[test]
    fn unpenalized_intercept_fits_the_log_odds() {
        // 15 positives, 5 negatives, no usable feature: the intercept should
        // land on ln(15/5) while the penalty keeps the coefficient at zero.
        let features: Vec<Vec<f64>> = (0..20).map(|_| vec![0.0]).collect();
        let labels: Vec<f64> = (0..20).map(|i| if i < 15 { 1.0 } else { -1.0 }).collect();
        let data = Dataset::new(features, labels).unwrap();
        let model = train_l1_logistic(&data, 10.0).unwrap();
        assert_eq!(model.coefficients, vec![0.0]);
        assert_relative_eq!(model.intercept, 3.0f64.ln(), epsilon = 1e-4);
    }

    #[test]
    fn support_shrinks_as_the_penalty_grows() {
        // Feature 0 carries the label, features 1-3 are weak noise. As the
        // penalty grows the noise coordinates drop out first, then everything.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..60 {
            let side: f64 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            features.push(vec![
                side * rng.gen_range(0.5..1.5),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
            ]);
            labels.push(side);
        }
        let data = Dataset::new(features, labels).unwrap();
        let penalties = [0.001, 0.5, 5.0, 1e4];
        let supports: Vec<usize> = penalties
            .iter()
            .map(|&lambda| train_l1_logistic(&data, lambda).unwrap().nonzero_count())
            .collect();
        for window in supports.windows(2) {
            assert!(
                window[0] >= window[1],
                "support grew along the penalty path: {supports:?}"
            );
        }
        assert_eq!(supports[penalties.len() - 1], 0);
        assert!(supports[0] >= 1);
    }

    #[test]
    fn zero_one_labels_train_identically_to_signed_labels() {
        let features: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64 / 15.0) - 1.0, ((i * 7) % 11) as f64 / 11.0])
            .collect();
        let signed: Vec<f64> = features
            .iter()
            .map(|row| if row[0] > 0.0 { 1.0 } else { -1.0 })
            .collect();
        let zero_one: Vec<f64> = signed.iter().map(|&y| if y > 0.0 { 1.0 } else { 0.0 }).collect();
        let a = train_l1_logistic(&Dataset::new(features.clone(), signed).unwrap(), 0.2).unwrap();
        let b = train_l1_logistic(&Dataset::new(features, zero_one).unwrap(), 0.2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_penalty() {
        let data = separable_dataset(10, 7);
        assert!(matches!(
            train_l1_logistic(&data, -1.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            train_l1_logistic(&data, f64::NAN),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn decision_panics_on_width_mismatch() {
        let model = LinearModel {
            coefficients: vec![1.0, 2.0],
            intercept: 0.0,
        };
        assert!(std::panic::catch_unwind(|| model.decision(&[1.0])).is_err());
    }
}
