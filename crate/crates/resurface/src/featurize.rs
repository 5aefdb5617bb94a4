//! Feature extraction for the two account-level classifiers.
//!
//! * [`suspension_features`] describes a single account for the
//!   will-this-account-get-suspended model: one indicator per watched seed
//!   account it follows, then a short block of profile statistics. With
//!   thousands of seeds the matrix is wide and mostly zero, which is exactly
//!   what the L1 trainer is for.
//! * [`refollow_features`] describes a (returning user, friend) pair for the
//!   will-this-friend-reconnect model: profile counts on both sides, their
//!   interaction history, and aggregate statistics of the user's circle of
//!   friends. Counts enter as `ln(1 + x)`; aggregates are computed on raw
//!   counts first and log-compressed after.
//!
//! [`ZScore`] carries per-column normalization fitted on training rows only,
//! so the test split never leaks into the statistics.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One account as captured in a crawl snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountSnapshot {
    /// Platform-assigned numeric id.
    pub id: u64,
    /// Account creation time, seconds since the Unix epoch.
    pub created_at: i64,
    /// How many accounts this account follows.
    pub friends_count: u64,
    /// How many accounts follow this one.
    pub followers_count: u64,
    /// Lifetime post count.
    pub tweet_count: u64,
    /// Lifetime favorite count.
    pub favorites_count: u64,
    /// Lifetime repost count.
    pub retweet_count: u64,
    /// Whether posts carry location data.
    pub geo_enabled: bool,
    /// Whether the account hides its timeline and follower pages.
    pub protected: bool,
    /// Whether the platform has verified the account.
    pub verified: bool,
    /// Self-declared interface language code.
    pub language: String,
    /// Ids this account follows (only the ones the crawl captured).
    #[serde(default)]
    pub follows: BTreeSet<u64>,
    /// Whether the account still resolved at snapshot time.
    pub active: bool,
}

impl AccountSnapshot {
    /// A neutral snapshot: zero counts, all flags off, active, empty
    /// language. Convenient as a starting point in tests and examples.
    pub fn new(id: u64) -> Self {
        AccountSnapshot {
            id,
            created_at: 0,
            friends_count: 0,
            followers_count: 0,
            tweet_count: 0,
            favorites_count: 0,
            retweet_count: 0,
            geo_enabled: false,
            protected: false,
            verified: false,
            language: String::new(),
            follows: BTreeSet::new(),
            active: true,
        }
    }
}

/// One labeled (returning user, friend) pair for the reconnection model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefollowRow {
    /// The returning user — the account whose friends are being scored.
    pub user: AccountSnapshot,
    /// The returning user's circle: every friend the crawl captured.
    pub user_friends: Vec<AccountSnapshot>,
    /// The friend being scored for reconnection.
    pub friend: AccountSnapshot,
    /// Times the user mentioned this friend.
    pub mentions: u64,
    /// Times the user reposted this friend.
    pub retweets: u64,
    /// Times the user replied to this friend.
    pub replies: u64,
    /// `Some(1)` if the friend reconnected, `Some(0)` if not, `None` when
    /// unlabeled.
    pub response: Option<i8>,
}

fn log1p(count: u64) -> f64 {
    (count as f64).ln_1p()
}

/// Mean, median, and population standard deviation of raw counts; all zero
/// for an empty slice. Median of an even count is the average of the two
/// middle values.
fn aggregate(values: &[u64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2] as f64
    } else {
        (sorted[sorted.len() / 2 - 1] as f64 + sorted[sorted.len() / 2] as f64) / 2.0
    };
    let variance = values
        .iter()
        .map(|&v| {
            let d = v as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    (mean, median, variance.sqrt())
}

fn indicator(flag: bool) -> f64 {
    if flag {
        1.0
    } else {
        0.0
    }
}

/// Features describing one account for the suspension model: one indicator
/// per seed it follows (in the order `seeds` is given), then creation time
/// (epoch seconds), friends, followers, and post counts, and the geo /
/// protected / verified flags. Length is `seeds.len() + 7`.
pub fn suspension_features(account: &AccountSnapshot, seeds: &[u64]) -> Vec<f64> {
    let mut features = Vec::with_capacity(seeds.len() + 7);
    for seed in seeds {
        features.push(indicator(account.follows.contains(seed)));
    }
    features.push(account.created_at as f64);
    features.push(account.friends_count as f64);
    features.push(account.followers_count as f64);
    features.push(account.tweet_count as f64);
    features.push(indicator(account.geo_enabled));
    features.push(indicator(account.protected));
    features.push(indicator(account.verified));
    features
}

/// Column names matching [`suspension_features`] order.
pub fn suspension_feature_names(seeds: &[u64]) -> Vec<String> {
    let mut names: Vec<String> = seeds.iter().map(|seed| format!("follows_{seed}")).collect();
    names.extend(
        [
            "created_at",
            "friends_count",
            "followers_count",
            "tweet_count",
            "geo_enabled",
            "protected",
            "verified",
        ]
        .map(String::from),
    );
    names
}

/// The 28 features describing one (returning user, friend) pair, in
/// [`refollow_feature_names`] order.
pub fn refollow_features(row: &RefollowRow) -> Vec<f64> {
    let mut features = Vec::with_capacity(28);
    // The friend's own footprint.
    features.push(log1p(row.friend.friends_count));
    features.push(log1p(row.friend.followers_count));
    features.push(log1p(row.friend.tweet_count));
    // Signed account-age gap in days: positive when the friend's account is
    // younger than the user's.
    features.push((row.friend.created_at - row.user.created_at) as f64 / 86_400.0);
    features.push(indicator(row.friend.follows.contains(&row.user.id)));
    // Interaction history.
    features.push(log1p(row.mentions));
    features.push(log1p(row.retweets));
    features.push(log1p(row.replies));
    // The user's own footprint.
    features.push(log1p(row.user.friends_count));
    features.push(log1p(row.user.followers_count));
    features.push(log1p(row.user.tweet_count));
    features.push(log1p(row.user.favorites_count));
    features.push(log1p(row.user.retweet_count));
    // Circle aggregates: statistics over the user's friends, log-compressed
    // after aggregation.
    for pick in [
        |a: &AccountSnapshot| a.friends_count,
        |a: &AccountSnapshot| a.followers_count,
        |a: &AccountSnapshot| a.tweet_count,
        |a: &AccountSnapshot| a.favorites_count,
    ] {
        let counts: Vec<u64> = row.user_friends.iter().map(pick).collect();
        let (mean, median, std) = aggregate(&counts);
        features.push(mean.ln_1p());
        features.push(median.ln_1p());
        features.push(std.ln_1p());
    }
    features.push(indicator(row.friend.verified));
    features.push(if row.user_friends.is_empty() {
        0.0
    } else {
        row.user_friends.iter().filter(|f| f.verified).count() as f64
            / row.user_friends.len() as f64
    });
    features.push(indicator(row.friend.language == row.user.language));
    features
}

/// Column names matching [`refollow_features`] order.
pub fn refollow_feature_names() -> Vec<String> {
    let mut names: Vec<String> = [
        "friend_friends_log",
        "friend_followers_log",
        "friend_tweets_log",
        "age_difference_days",
        "friend_followed_user",
        "mentions_log",
        "retweets_log",
        "replies_log",
        "user_friends_log",
        "user_followers_log",
        "user_tweets_log",
        "user_favorites_log",
        "user_retweets_log",
    ]
    .map(String::from)
    .to_vec();
    for group in ["friends", "followers", "tweets", "favorites"] {
        for stat in ["mean", "median", "std"] {
            names.push(format!("circle_{group}_{stat}_log"));
        }
    }
    names.extend(["friend_verified", "circle_verified_fraction", "same_language"].map(String::from));
    names
}

/// Per-column standardization statistics, fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScore {
    /// Column means of the fitting rows.
    pub means: Vec<f64>,
    /// Column population standard deviations of the fitting rows.
    pub stds: Vec<f64>,
}

impl ZScore {
    /// Fit means and population standard deviations column by column.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidDataset`] when `rows` is empty or ragged.
    pub fn fit(rows: &[Vec<f64>]) -> Result<ZScore> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidDataset(
                "cannot fit normalization to no rows".into(),
            ));
        };
        let width = first.len();
        if rows.iter().any(|row| row.len() != width) {
            return Err(Error::InvalidDataset(
                "normalization rows must all have the same width".into(),
            ));
        }
        let n = rows.len() as f64;
        let mut means = vec![0.0; width];
        for row in rows {
            for (mean, value) in means.iter_mut().zip(row) {
                *mean += value;
            }
        }
        for mean in &mut means {
            *mean /= n;
        }
        let mut stds = vec![0.0; width];
        for row in rows {
            for ((std, value), mean) in stds.iter_mut().zip(row).zip(&means) {
                let d = value - mean;
                *std += d * d;
            }
        }
        for std in &mut stds {
            *std = (*std / n).sqrt();
        }
        Ok(ZScore { means, stds })
    }

    /// Standardize one row: `(x - mean) / std`, with constant columns
    /// (zero standard deviation) mapping to zero.
    ///
    /// # Panics
    ///
    /// When the row width differs from the fitted width.
    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        assert_eq!(
            row.len(),
            self.means.len(),
            "row width {} does not match fitted width {}",
            row.len(),
            self.means.len()
        );
        row.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((value, mean), std)| {
                if *std == 0.0 {
                    0.0
                } else {
                    (value - mean) / std
                }
            })
            .collect()
    }

    /// [`ZScore::apply`] over many rows.
    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|row| self.apply(row)).collect()
    }
}

/// Fit a [`ZScore`] on `train`, then standardize both splits with the
/// training statistics.
///
/// # Errors
///
/// [`Error::InvalidDataset`] when `train` is empty or ragged.
#[allow(clippy::type_complexity)]
pub fn zscore_fit_apply(
    train: &[Vec<f64>],
    test: &[Vec<f64>],
) -> Result<(ZScore, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let stats = ZScore::fit(train)?;
    let train_scaled = stats.apply_all(train);
    let test_scaled = stats.apply_all(test);
    Ok((stats, train_scaled, test_scaled))
}
