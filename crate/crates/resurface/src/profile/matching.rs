//! Pairwise profile comparison, the logistic match model, and auto-labeling.
//!
//! A pair of profiles reduces to four features: similarity ratios of the
//! screen names and display names, and fingerprint agreement of the profile
//! and banner images. A logistic model maps the feature vector to the
//! probability that the two profiles belong to the same person; pairs at or
//! above the model threshold classify as matches.
//!
//! [`auto_label`] applies the cheap labeling rules used to bootstrap training
//! corpora: pairs sharing a `user_id` are the same user by definition, pairs
//! with a tiny feature norm are confidently different, and pairs with a large
//! norm are queued for manual review rather than trusted blindly.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::learn::sigmoid;
use crate::profile::raster::{image_match, Raster};
use crate::profile::text::{levenshtein_ratio_with, RatioVariant};

/// One account profile as scraped: identifiers, the two name strings, and
/// optional grayscale profile/banner images.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRecord {
    /// Platform-assigned account id. Two records sharing it are the same
    /// account by definition.
    pub user_id: String,
    /// The handle (login name).
    pub screen_name: String,
    /// The display name.
    pub name: String,
    /// Profile picture, if the account has one we could fetch.
    pub profile_image: Option<Raster>,
    /// Banner picture, if any.
    pub banner_image: Option<Raster>,
}

/// The four pairwise features, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonFeatures {
    /// Similarity ratio of the screen names.
    pub screen_name_similarity: f64,
    /// Similarity ratio of the display names.
    pub name_similarity: f64,
    /// Fingerprint agreement of the profile images.
    pub profile_image_match: f64,
    /// Fingerprint agreement of the banner images.
    pub banner_image_match: f64,
}

impl ComparisonFeatures {
    /// The features as a fixed-order array (screen name, name, profile
    /// image, banner image) — the order the model weights use.
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.screen_name_similarity,
            self.name_similarity,
            self.profile_image_match,
            self.banner_image_match,
        ]
    }

    /// Euclidean norm of the feature vector, the quantity the auto-label
    /// rules threshold on.
    pub fn norm(&self) -> f64 {
        self.as_array().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Logistic model over [`ComparisonFeatures`]: the probability of a match is
/// `sigmoid(weights · features + intercept)` — larger scores mean likelier
/// matches — and pairs at or above `threshold` classify as matches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchModel {
    /// Weights in [`ComparisonFeatures::as_array`] order.
    pub weights: [f64; 4],
    /// Intercept added to the weighted sum.
    pub intercept: f64,
    /// Probability cutoff for classifying a pair as a match.
    pub threshold: f64,
}

impl MatchModel {
    /// The coefficients bundled with the crate, estimated on a labeled
    /// corpus of account pairs, with the decision threshold tuned on the
    /// same corpus. Screen-name similarity, name similarity, and profile
    /// image agreement all push toward a match; banner agreement carried no
    /// weight in that corpus.
    pub fn bundled() -> Self {
        MatchModel {
            weights: [2.94, 7.05, 1.88, 0.0],
            intercept: -8.05,
            threshold: 0.782,
        }
    }
}

/// Compare two profiles with the default (indel-weighted) similarity ratio.
///
/// # Errors
///
/// Propagates image-fingerprint failures (images smaller than 8×8).
pub fn compare_profiles(a: &ProfileRecord, b: &ProfileRecord) -> Result<ComparisonFeatures> {
    compare_profiles_with(a, b, RatioVariant::IndelWeighted)
}

/// Compare two profiles using the chosen similarity-ratio variant.
///
/// # Errors
///
/// Propagates image-fingerprint failures (images smaller than 8×8).
pub fn compare_profiles_with(
    a: &ProfileRecord,
    b: &ProfileRecord,
    variant: RatioVariant,
) -> Result<ComparisonFeatures> {
    Ok(ComparisonFeatures {
        screen_name_similarity: levenshtein_ratio_with(&a.screen_name, &b.screen_name, variant),
        name_similarity: levenshtein_ratio_with(&a.name, &b.name, variant),
        profile_image_match: image_match(a.profile_image.as_ref(), b.profile_image.as_ref())?,
        banner_image_match: image_match(a.banner_image.as_ref(), b.banner_image.as_ref())?,
    })
}

/// Probability under `model` that the compared pair is the same person.
pub fn match_probability(model: &MatchModel, features: &ComparisonFeatures) -> f64 {
    let score: f64 = model
        .weights
        .iter()
        .zip(features.as_array())
        .map(|(w, f)| w * f)
        .sum::<f64>()
        + model.intercept;
    sigmoid(score)
}

/// Whether the pair classifies as a match: probability at or above the model
/// threshold.
pub fn classify_pair(model: &MatchModel, features: &ComparisonFeatures) -> bool {
    match_probability(model, features) >= model.threshold
}

/// What a labeling pass concluded about a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelClass {
    /// The two profiles belong to the same user.
    SameUser,
    /// The two profiles belong to different users.
    DifferentUsers,
    /// No rule fired; the pair stays unlabeled.
    Unlabeled,
}

/// Where a label (or its absence) came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    /// The records share a `user_id`; same user by definition.
    UserIdMatch,
    /// The feature norm was below the low-similarity cut.
    LowSimilarityRule,
    /// A human labeled the pair.
    Manual,
    /// A trained model labeled the pair.
    Model,
}

/// Label assigned to one pair, with provenance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairLabel {
    pub class: LabelClass,
    /// Present when `class` is a definite label.
    pub source: Option<LabelSource>,
    /// True when the pair looks similar enough (large feature norm) that it
    /// was queued for manual review instead of being auto-labeled.
    pub manual_review_candidate: bool,
}

/// Feature norm below which a pair of distinct accounts auto-labels as
/// different users.
pub const LOW_SIMILARITY_NORM: f64 = 0.1;
/// Feature norm above which a pair of distinct accounts is queued for manual
/// review.
pub const REVIEW_CANDIDATE_NORM: f64 = 0.85;

/// Label one compared pair by the bootstrap rules.
pub fn auto_label_pair(
    a: &ProfileRecord,
    b: &ProfileRecord,
    features: &ComparisonFeatures,
) -> PairLabel {
    if a.user_id == b.user_id {
        return PairLabel {
            class: LabelClass::SameUser,
            source: Some(LabelSource::UserIdMatch),
            manual_review_candidate: false,
        };
    }
    let norm = features.norm();
    if norm < LOW_SIMILARITY_NORM {
        PairLabel {
            class: LabelClass::DifferentUsers,
            source: Some(LabelSource::LowSimilarityRule),
            manual_review_candidate: false,
        }
    } else {
        PairLabel {
            class: LabelClass::Unlabeled,
            source: None,
            manual_review_candidate: norm > REVIEW_CANDIDATE_NORM,
        }
    }
}

/// Label each pair by the bootstrap rules, comparing with the default ratio.
/// The manual-review queue is the set of results with
/// `manual_review_candidate` set.
///
/// # Errors
///
/// Propagates image-fingerprint failures from feature computation.
pub fn auto_label(pairs: &[(&ProfileRecord, &ProfileRecord)]) -> Result<Vec<PairLabel>> {
    pairs
        .iter()
        .map(|(a, b)| {
            let features = compare_profiles(a, b)?;
            Ok(auto_label_pair(a, b, &features))
        })
        .collect()
}
