//! Seeded Monte Carlo estimates of search cost, with early stopping.
//!
//! Each run draws a hidden world — did the user return, which friends did
//! they refollow, where do they sit in each follower list — then executes a
//! policy against it. The sample mean converges to the analytic expected
//! cost, and identical seeds reproduce identical batches bit for bit.
//!
//! Run with: `cargo run --example simulate_search`

use resurface::search::model::{FriendSpec, SearchInstance};
use resurface::search::policy::{expected_cost, optimal_policy, GroundTruth};
use resurface::search::sim::{simulate, simulate_given_truth};

fn main() -> resurface::Result<()> {
    let instance = SearchInstance::new(
        vec![
            FriendSpec { id: 0, followers: 12_000, phi: 0.7 },
            FriendSpec { id: 1, followers: 4_000, phi: 0.4 },
            FriendSpec { id: 2, followers: 20_000, phi: 0.2 },
        ],
        5_000,
        0.8,
        0.0,
    )?;
    let policy = optimal_policy(&instance).policy;
    let analytic = expected_cost(&instance, &policy)?;

    // The sample mean lands within a few standard errors of the analytic
    // value, and more runs squeeze the error bar.
    println!("analytic expected cost: {analytic:.4}\n");
    for runs in [1_000, 10_000, 100_000] {
        let report = simulate(&instance, &policy, runs, 42)?;
        println!(
            "{runs:>7} runs: mean {:.4} ± {:.4}  (found {:.1}% of the time)",
            report.mean_unsuccessful_queries,
            report.std_error,
            100.0 * report.terminations.found as f64 / report.runs as f64
        );
    }

    // Same seed, same numbers — regardless of thread count, because run r
    // draws from its own generator stream.
    let again = simulate(&instance, &policy, 10_000, 42)?;
    let first = simulate(&instance, &policy, 10_000, 42)?;
    assert_eq!(first, again);
    println!("\nseed 42 reproduces itself exactly: mean {:.6}", first.mean_unsuccessful_queries);

    // A stopping threshold: once the posterior that the user returned at all
    // falls below rho_bar, the search gives up instead of grinding on.
    let cautious = SearchInstance::new(instance.friends().to_vec(), 5_000, 0.5, 0.45)?;
    let policy = optimal_policy(&cautious).policy;
    let report = simulate(&cautious, &policy, 20_000, 7)?;
    println!(
        "\nwith rho0 0.5 and stop threshold 0.45: found {}, stopped early {}, exhausted {}",
        report.terminations.found,
        report.terminations.below_threshold,
        report.terminations.exhausted
    );

    // Pinning the ground truth freezes existence and refollows; only the
    // account's position within each follower list stays random. Useful for
    // "what would this policy have cost in the world we later observed?"
    let truth = GroundTruth::present([0]);
    let policy = optimal_policy(&instance).policy;
    let conditioned = simulate_given_truth(&instance, &policy, &truth, 20_000, 11)?;
    println!(
        "\ngiven the user returned and refollowed only friend 0:\n  mean cost {:.4} ± {:.4}, found {:.1}%",
        conditioned.mean_unsuccessful_queries,
        conditioned.std_error,
        100.0 * conditioned.terminations.found as f64 / conditioned.runs as f64
    );
    Ok(())
}
