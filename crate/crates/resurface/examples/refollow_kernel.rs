//! Kernel logistic regression end to end: from account snapshots to
//! reconnection probabilities.
//!
//! The refollow question — "if this user returns, will they follow friend F
//! again?" — gets 28 features per (user, friend) pair: interaction counts,
//! account ages and sizes, and aggregates over the user's whole circle.
//! Relationships like "heavy interaction AND similar age" are products of
//! features, which a linear model cannot express; the quadratic kernel
//! `K(x, y) = (1 + x·y)^2` can.
//!
//! Run with: `cargo run --example refollow_kernel`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resurface::featurize::{
    refollow_feature_names, refollow_features, AccountSnapshot, RefollowRow, ZScore,
};
use resurface::io::ModelEnvelope;
use resurface::learn::{confusion_at_threshold, train_kernel_logistic, Dataset};

/// One synthetic (user, friend) pair. Refollowed friendships show heavier
/// interaction and closer account ages.
fn draw_row(rng: &mut ChaCha8Rng, user: &AccountSnapshot, circle: &[AccountSnapshot]) -> RefollowRow {
    let refollow = rng.gen_bool(0.5);
    let mut friend = AccountSnapshot::new(rng.gen_range(1_000..9_999));
    friend.followers_count = rng.gen_range(100..80_000);
    friend.friends_count = rng.gen_range(10..2_000);
    friend.tweet_count = rng.gen_range(100..100_000);
    friend.created_at = if refollow {
        user.created_at + rng.gen_range(-86_400 * 400..86_400 * 400)
    } else {
        user.created_at + rng.gen_range(86_400 * 100..86_400 * 2_500)
    };
    friend.language = "en".into();
    let heavy = if refollow { 2..25 } else { 0..8 };
    RefollowRow {
        user: user.clone(),
        user_friends: circle.to_vec(),
        friend,
        mentions: rng.gen_range(heavy.clone()),
        retweets: rng.gen_range(heavy.clone()),
        replies: rng.gen_range(heavy),
        response: Some(i8::from(refollow)),
    }
}

fn main() -> resurface::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut user = AccountSnapshot::new(1);
    user.created_at = 1_300_000_000;
    user.friends_count = 120;
    user.followers_count = 80;
    user.tweet_count = 4_000;
    user.language = "en".into();
    let circle: Vec<AccountSnapshot> = (0..12)
        .map(|i| {
            let mut friend = AccountSnapshot::new(100 + i);
            friend.followers_count = rng.gen_range(100..20_000);
            friend.friends_count = rng.gen_range(50..3_000);
            friend.tweet_count = rng.gen_range(200..40_000);
            friend.favorites_count = rng.gen_range(0..5_000);
            friend
        })
        .collect();

    let pairs: Vec<RefollowRow> = (0..80).map(|_| draw_row(&mut rng, &user, &circle)).collect();
    let features: Vec<Vec<f64>> = pairs.iter().map(refollow_features).collect();
    let labels: Vec<f64> = pairs
        .iter()
        .map(|row| f64::from(row.response.expect("synthetic rows are labeled")))
        .collect();
    println!("{} pairs, {} features each\n", features.len(), features[0].len());

    // Standardize on the training split only — the kernel is a polynomial in
    // feature values, so raw count scales would drown everything else.
    let split = 60;
    let stats = ZScore::fit(&features[..split])?;
    let train = Dataset::new(stats.apply_all(&features[..split]), labels[..split].to_vec())?;

    let model = train_kernel_logistic(&train, 0.01)?;
    println!(
        "trained a quadratic-kernel classifier: {} support points, lambda {}",
        model.support_points.len(),
        model.lambda
    );

    // The envelope bundles the model with its normalization, so deployment
    // feeds it raw feature rows.
    let envelope = ModelEnvelope::kernel(&model, refollow_feature_names(), Some(stats), Some(0.5));
    let held_out: Vec<f64> = features[split..]
        .iter()
        .map(|row| envelope.predict(row))
        .collect::<resurface::Result<_>>()?;
    let matrix = confusion_at_threshold(&held_out, &labels[split..], 0.5)?;
    println!(
        "held-out: {} of {} pairs classified correctly (tp {} fp {} tn {} fn {})\n",
        matrix.true_positives + matrix.true_negatives,
        held_out.len(),
        matrix.true_positives,
        matrix.false_positives,
        matrix.true_negatives,
        matrix.false_negatives
    );

    // These probabilities are exactly the phi_i a search instance wants.
    println!("sample reconnection probabilities:");
    for (row, probability) in pairs[split..].iter().zip(&held_out).take(6) {
        println!(
            "  friend {}: {} interactions -> phi {:.3} (refollowed: {})",
            row.friend.id,
            row.mentions + row.retweets + row.replies,
            probability,
            row.response == Some(1)
        );
    }
    Ok(())
}
