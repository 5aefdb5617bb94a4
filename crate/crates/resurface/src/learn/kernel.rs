//! Kernel logistic regression with the quadratic kernel, fit by damped
//! Newton steps.
//!
//! The model scores a point as `Σᵢ αᵢ K(xᵢ, x)` over the training points,
//! with `K(x, y) = (1 + x·y)²` — equivalent to a linear model over all
//! degree-≤2 monomials, so it handles interaction-shaped boundaries (XOR)
//! that defeat a plain linear classifier. Training minimizes
//!
//! `J(α) = Σᵢ log(1 + exp(-yᵢ (Kα)ᵢ)) + λ‖α‖²`
//!
//! whose ridge term makes the Newton system `(K D K + 2λI) δ = -∇J` positive
//! definite for any `λ > 0`, so a Cholesky solve always succeeds; an Armijo
//! backtracking line search keeps each step a strict improvement.
//!
//! [`kernel_objective`] and [`kernel_gradient`] expose the exact objective
//! the trainer minimizes so the gradient can be checked by finite
//! differences.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{dot, log1p_exp, sigmoid, Dataset};

/// Kernel classifier: one coefficient per training point, scored against the
/// stored support points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    /// Per-support-point coefficients.
    pub alphas: Vec<f64>,
    /// The training feature rows the kernel is evaluated against.
    pub support_points: Vec<Vec<f64>>,
    /// The ridge weight the model was trained with.
    pub lambda: f64,
}

impl KernelModel {
    /// Raw score `Σᵢ αᵢ K(support_point_i, features)`.
    ///
    /// # Panics
    ///
    /// When `features` has a different width than the support points.
    pub fn decision(&self, features: &[f64]) -> f64 {
        self.alphas
            .iter()
            .zip(&self.support_points)
            .map(|(&alpha, point)| alpha * quadratic_kernel(point, features))
            .sum()
    }

    /// `P(y = +1 | features)`.
    pub fn predict_probability(&self, features: &[f64]) -> f64 {
        sigmoid(self.decision(features))
    }
}

/// The quadratic kernel `(1 + x·y)²`.
///
/// # Panics
///
/// When the two points have different widths.
pub fn quadratic_kernel(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "kernel arguments must have equal width");
    let inner = dot(x, y);
    (1.0 + inner) * (1.0 + inner)
}

/// The symmetric kernel matrix `K[i][j] = K(points[i], points[j])`.
pub fn gram_matrix(points: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(points.len(), points.len(), |i, j| {
        quadratic_kernel(&points[i], &points[j])
    })
}

fn objective_from_scores(
    labels: &[f64],
    scores: &DVector<f64>,
    alphas: &DVector<f64>,
    lambda: f64,
) -> f64 {
    let loss: f64 = labels
        .iter()
        .zip(scores.iter())
        .map(|(&label, &score)| log1p_exp(-label * score))
        .sum();
    loss + lambda * alphas.norm_squared()
}

fn gradient_from_scores(
    gram: &DMatrix<f64>,
    labels: &[f64],
    scores: &DVector<f64>,
    alphas: &DVector<f64>,
    lambda: f64,
) -> DVector<f64> {
    let residuals = DVector::from_fn(labels.len(), |i, _| {
        -labels[i] * sigmoid(-labels[i] * scores[i])
    });
    gram * residuals + alphas * (2.0 * lambda)
}

/// Training objective at `alphas`: summed logistic loss of the kernel scores
/// plus `λ‖α‖²`. This is exactly what [`train_kernel_logistic`] minimizes.
pub fn kernel_objective(points: &[Vec<f64>], labels: &[f64], alphas: &[f64], lambda: f64) -> f64 {
    let gram = gram_matrix(points);
    let alphas = DVector::from_column_slice(alphas);
    let scores = &gram * &alphas;
    objective_from_scores(labels, &scores, &alphas, lambda)
}

/// Gradient of [`kernel_objective`] with respect to `alphas`.
pub fn kernel_gradient(
    points: &[Vec<f64>],
    labels: &[f64],
    alphas: &[f64],
    lambda: f64,
) -> Vec<f64> {
    let gram = gram_matrix(points);
    let alphas = DVector::from_column_slice(alphas);
    let scores = &gram * &alphas;
    gradient_from_scores(&gram, labels, &scores, &alphas, lambda)
        .iter()
        .copied()
        .collect()
}

const MAX_NEWTON_ITERATIONS: usize = 100;
const GRADIENT_TOLERANCE: f64 = 1e-5;
const ARMIJO_SLOPE: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// Fit a kernel logistic model on `data` with ridge weight `lambda`.
///
/// Iterates damped Newton steps until the gradient's largest component falls
/// below `1e-5` (or an iteration cap, returning the best iterate found).
///
/// # Errors
///
/// [`Error::InvalidArgument`] when `lambda` is not strictly positive and
/// finite — the ridge term is what guarantees the Newton system is solvable.
pub fn train_kernel_logistic(data: &Dataset, lambda: f64) -> Result<KernelModel> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "ridge weight must be finite and positive, got {lambda}"
        )));
    }
    let n = data.len();
    let labels = data.labels();
    let gram = gram_matrix(data.features());
    let mut alphas = DVector::zeros(n);

    for _ in 0..MAX_NEWTON_ITERATIONS {
        let scores = &gram * &alphas;
        let gradient = gradient_from_scores(&gram, labels, &scores, &alphas, lambda);
        if gradient.amax() < GRADIENT_TOLERANCE {
            break;
        }

        let curvatures = DVector::from_fn(n, |i, _| {
            let s = sigmoid(-labels[i] * scores[i]);
            s * (1.0 - s)
        });
        let mut hessian = &gram * DMatrix::from_diagonal(&curvatures) * &gram;
        for i in 0..n {
            hessian[(i, i)] += 2.0 * lambda;
        }
        let direction = hessian
            .cholesky()
            .expect("ridge-damped Hessian is positive definite")
            .solve(&-&gradient);

        let objective_here = objective_from_scores(labels, &scores, &alphas, lambda);
        let slope = gradient.dot(&direction);
        let mut eta = 1.0;
        for _ in 0..MAX_HALVINGS {
            let candidate = &alphas + &direction * eta;
            let candidate_scores = &gram * &candidate;
            let candidate_objective =
                objective_from_scores(labels, &candidate_scores, &candidate, lambda);
            if candidate_objective <= objective_here + ARMIJO_SLOPE * eta * slope {
                break;
            }
            eta *= 0.5;
        }
        alphas += &direction * eta;
    }

    Ok(KernelModel {
        alphas: alphas.iter().copied().collect(),
        support_points: data.features().to_vec(),
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Four noisy clusters at (±1, ±1); the label is the product of the
    /// corner signs — the classic boundary no linear model can draw.
    fn xor_dataset(rows: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut features = Vec::with_capacity(rows);
        let mut labels = Vec::with_capacity(rows);
        for _ in 0..rows {
            let sx: f64 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let sy: f64 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            features.push(vec![
                sx + rng.gen_range(-0.3..0.3),
                sy + rng.gen_range(-0.3..0.3),
            ]);
            labels.push(sx * sy);
        }
        Dataset::new(features, labels).unwrap()
    }

    #[test]
    fn quadratic_kernel_golden_value() {
        // x·y = 1*3 + 2*4 = 11, so K = (1 + 11)² = 144.
        assert_eq!(quadratic_kernel(&[1.0, 2.0], &[3.0, 4.0]), 144.0);
        assert_eq!(quadratic_kernel(&[], &[]), 1.0);
    }

    #[test]
    fn gram_matrix_is_positive_semidefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let points: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let gram = gram_matrix(&points);
        assert_eq!(gram, gram.transpose());
        let eigenvalues = gram.clone().symmetric_eigen().eigenvalues;
        let scale = eigenvalues.amax().max(1.0);
        for &eigenvalue in eigenvalues.iter() {
            assert!(
                eigenvalue >= -1e-9 * scale,
                "negative eigenvalue {eigenvalue}"
            );
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let data = xor_dataset(8, 22);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let lambda = 0.05;
        for _ in 0..20 {
            let alphas: Vec<f64> = (0..data.len()).map(|_| rng.gen_range(-0.4..0.4)).collect();
            let gradient = kernel_gradient(data.features(), data.labels(), &alphas, lambda);
            let h = 1e-6;
            for j in 0..alphas.len() {
                let mut up = alphas.clone();
                let mut down = alphas.clone();
                up[j] += h;
                down[j] -= h;
                let estimate = (kernel_objective(data.features(), data.labels(), &up, lambda)
                    - kernel_objective(data.features(), data.labels(), &down, lambda))
                    / (2.0 * h);
                assert_relative_eq!(gradient[j], estimate, max_relative = 1e-5, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn xor_boundary_is_learned() {
        let data = xor_dataset(200, 9);
        let model = train_kernel_logistic(&data, 1e-3).unwrap();
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
    }

    #[test]
    fn training_reduces_the_objective_below_start() {
        let data = xor_dataset(40, 10);
        let lambda = 0.01;
        let start = kernel_objective(
            data.features(),
            data.labels(),
            &vec![0.0; data.len()],
            lambda,
        );
        let model = train_kernel_logistic(&data, lambda).unwrap();
        let end = kernel_objective(data.features(), data.labels(), &model.alphas, lambda);
        assert!(end < start, "objective did not improve: {start} -> {end}");
        // At convergence the gradient is (near) zero.
        let gradient = kernel_gradient(data.features(), data.labels(), &model.alphas, lambda);
        let worst = gradient.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        assert!(worst < 1e-4, "gradient still large: {worst}");
    }

    #[test]
    fn model_carries_its_training_configuration() {
        let data = xor_dataset(16, 12);
        let model = train_kernel_logistic(&data, 0.5).unwrap();
        assert_eq!(model.support_points, data.features());
        assert_eq!(model.alphas.len(), data.len());
        assert_eq!(model.lambda, 0.5);
    }

    #[test]
    fn rejects_bad_ridge_weight() {
        let data = xor_dataset(8, 13);
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                train_kernel_logistic(&data, bad),
                Err(Error::InvalidArgument(_))
            ));
        }
    }
}
