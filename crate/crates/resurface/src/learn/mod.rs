//! Supervised learners behind the match and reconnection models.
//!
//! Two trainers share the [`Dataset`] container:
//!
//! * [`linear`] — logistic regression with an L1 penalty, fit by proximal
//!   gradient descent. The penalty drives exact zeros into the coefficient
//!   vector, which matters when the features are thousands of indicator
//!   columns and only a handful carry signal.
//! * [`kernel`] — logistic regression in the feature space induced by the
//!   quadratic kernel `(1 + x·y)²`, fit by damped Newton steps. This captures
//!   pairwise feature interactions (the XOR-shaped boundaries a linear model
//!   cannot express) at the price of one coefficient per training point.
//!
//! [`metrics`] evaluates either model: ROC curves with an exact
//! integer-arithmetic area computation, and thresholded confusion matrices.
//!
//! Labels may arrive as `{0, 1}` or `{-1, +1}`; the container normalizes to
//! `±1` internally. Scores follow the convention that larger means likelier
//! positive: `P(y = +1 | x) = sigmoid(score)`.

pub mod kernel;
pub mod linear;
pub mod metrics;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use kernel::{
    gram_matrix, kernel_gradient, kernel_objective, quadratic_kernel, train_kernel_logistic,
    KernelModel,
};
pub use linear::{
    logistic_loss, logistic_loss_gradient, logistic_objective, train_l1_logistic,
    train_l1_logistic_traced, LinearModel,
};
pub use metrics::{
    confusion_at_threshold, roc_auc, roc_curve, ConfusionMatrix, RocCurve, RocPoint,
};

/// Numerically stable logistic function `1 / (1 + e^{-z})`.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow on either tail.
pub(crate) fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A validated training set: rectangular finite features with one `±1` label
/// per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<f64>,
}

impl Dataset {
    /// Build a dataset, normalizing `{0, 1}` labels to `{-1, +1}`.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidDataset`] when the row and label counts differ, the
    /// set is empty, rows are ragged, any feature is non-finite, or a label
    /// is not `0`, `1`, or `-1`.
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if features.is_empty() {
            return Err(Error::InvalidDataset("dataset is empty".into()));
        }
        let width = features[0].len();
        for (row_index, row) in features.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidDataset(format!(
                    "row {row_index} has {} features, expected {width}",
                    row.len()
                )));
            }
            if row.iter().any(|value| !value.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "row {row_index} contains a non-finite feature"
                )));
            }
        }
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(row_index, label)| {
                if label == 1.0 {
                    Ok(1.0)
                } else if label == 0.0 || label == -1.0 {
                    Ok(-1.0)
                } else {
                    Err(Error::InvalidDataset(format!(
                        "label {label} at row {row_index} is not 0/1 or -1/+1"
                    )))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Dataset { features, labels })
    }

    /// Number of rows (always at least 1).
    pub fn len(&self) -> usize {
        self.features.len()
    }

    /// Always false: empty datasets fail construction.
    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Number of features per row.
    pub fn width(&self) -> usize {
        self.features[0].len()
    }

    /// All feature rows.
    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    /// Labels, normalized to `±1`.
    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// One feature row.
    pub fn row(&self, index: usize) -> &[f64] {
        &self.features[index]
    }

    /// The rows at `indices`, in the order given (for train/test splits).
    ///
    /// # Errors
    ///
    /// [`Error::InvalidDataset`] when `indices` is empty or any index is out
    /// of bounds.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        if indices.is_empty() {
            return Err(Error::InvalidDataset("subset of no rows".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::InvalidDataset(format!(
                "subset index {bad} out of bounds for {} rows",
                self.len()
            )));
        }
        Ok(Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        })
    }
}
