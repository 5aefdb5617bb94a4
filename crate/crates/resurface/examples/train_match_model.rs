//! Train the same-person classifier: L1-penalized logistic regression with a
//! sparsity path and ROC/AUC evaluation.
//!
//! The training rows mimic compared profile pairs: four informative
//! similarity features plus two pure-noise columns. The L1 penalty drives
//! useless coefficients to exactly zero, so the sparsity path doubles as
//! feature selection.
//!
//! Run with: `cargo run --example train_match_model`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resurface::learn::{
    confusion_at_threshold, roc_curve, sigmoid, train_l1_logistic, Dataset,
};

/// Draw one synthetic pair: same-person pairs have high similarity features,
/// different-person pairs low, noise columns carry nothing either way.
fn draw_pair(rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    let same = rng.gen_bool(0.4);
    let bump = if same { 0.55 } else { 0.0 };
    let feature = |rng: &mut ChaCha8Rng| f64::min(bump + rng.gen_range(0.0..0.45), 1.0);
    let row = vec![
        feature(rng),                    // screen-name similarity
        feature(rng),                    // display-name similarity
        f64::from(same && rng.gen_bool(0.5)), // profile image kept
        f64::from(same && rng.gen_bool(0.3)), // banner image kept
        rng.gen_range(-1.0..1.0),        // noise
        rng.gen_range(-1.0..1.0),        // noise
    ];
    (row, f64::from(same))
}

fn main() -> resurface::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..600 {
        let (row, label) = draw_pair(&mut rng);
        rows.push(row);
        labels.push(label);
    }
    let train = Dataset::new(rows[..400].to_vec(), labels[..400].to_vec())?;
    let test_rows = &rows[400..];
    let test_labels = &labels[400..];

    // The sparsity path: stronger penalties keep fewer features.
    println!("lambda    nonzero  test acc  test auc");
    for lambda in [0.001, 0.01, 0.1, 1.0, 10.0] {
        let model = train_l1_logistic(&train, lambda)?;
        let scores: Vec<f64> = test_rows
            .iter()
            .map(|row| sigmoid(model.decision(row)))
            .collect();
        let matrix = confusion_at_threshold(&scores, test_labels, 0.5)?;
        let curve = roc_curve(&scores, test_labels)?;
        println!(
            "{lambda:<8}  {:>7}  {:>8.4}  {:>8.4}",
            model.nonzero_count(),
            matrix.accuracy(),
            curve.auc
        );
    }

    // A closer look at one well-regularized model.
    let model = train_l1_logistic(&train, 0.1)?;
    println!("\nlambda 0.1 coefficients (noise columns land on exactly zero):");
    let names = [
        "screen name", "display name", "profile image", "banner image", "noise a", "noise b",
    ];
    for (name, coefficient) in names.iter().zip(&model.coefficients) {
        println!("  {name:<13} {coefficient:>8.4}");
    }
    println!("  {:<13} {:>8.4}", "intercept", model.intercept);

    let scores: Vec<f64> = test_rows
        .iter()
        .map(|row| sigmoid(model.decision(row)))
        .collect();
    let curve = roc_curve(&scores, test_labels)?;
    println!("\nROC curve (every {}th point), AUC {:.4}:", 8, curve.auc);
    println!("  {:>5}  {:>5}", "fpr", "tpr");
    for point in curve.points.iter().step_by(8) {
        println!("  {:>5.3}  {:>5.3}", point.false_positive_rate, point.true_positive_rate);
    }
    Ok(())
}
