//! Build a search instance and compare query-order policies.
//!
//! A suspended user followed four friends. If they return under a new
//! account, they refollow friend `i` with probability `phi_i`, and we can
//! page through friend `i`'s follower list 5000 accounts at a time. Which
//! order of page fetches finds the new account cheapest?
//!
//! Run with: `cargo run --example search_policies`

use resurface::search::model::{FriendSpec, SearchInstance};
use resurface::search::policy::{
    brute_force_optimal, gamma, greedy_policy, max_p_policy, min_n_policy, optimal_policy,
};

fn main() -> resurface::Result<()> {
    let instance = SearchInstance::new(
        vec![
            // Small audience, strong bond: cheap pages, likely refollow.
            FriendSpec { id: 0, followers: 3_200, phi: 0.85 },
            // Big account: ten pages to clear, decent odds.
            FriendSpec { id: 1, followers: 48_000, phi: 0.60 },
            FriendSpec { id: 2, followers: 9_000, phi: 0.35 },
            // Tiny account the user barely knew.
            FriendSpec { id: 3, followers: 700, phi: 0.10 },
        ],
        5_000, // page size
        0.7,   // prior that the user returns at all
        0.0,   // never stop early
    )?;

    println!(
        "{} friends, {} page fetches to exhaust every follower list\n",
        instance.len(),
        instance.total_queries()
    );

    // Four constructions of a full query order. "Expected cost" counts
    // unsuccessful page fetches before the search ends.
    for (name, report) in [
        ("optimal", optimal_policy(&instance)),
        ("greedy", greedy_policy(&instance)),
        ("min-n", min_n_policy(&instance)),
        ("max-p", max_p_policy(&instance)),
    ] {
        println!(
            "{name:>8}  expected cost {:.4}  order {:?}",
            report.expected_cost,
            report.policy.stages()
        );
    }

    // The index-rule construction provably minimizes expected cost; an
    // exhaustive search over all interleavings agrees.
    let best = optimal_policy(&instance);
    let brute = brute_force_optimal(&instance, 32)?;
    println!(
        "\nexhaustive check: {:.6} (index rule) == {:.6} (brute force)",
        best.expected_cost, brute.expected_cost
    );

    // The rule scores each friend with a cost index recomputed as pages are
    // spent, and always fetches the friend with the smallest index — so the
    // indices along the chosen order come out nondecreasing.
    let state = instance.initial_state();
    println!("\ninitial cost indices (fresh state; smallest goes first):");
    for friend in instance.friends() {
        println!("  friend {}: {:.4}", friend.id, gamma(&instance, &state, friend.id)?);
    }
    if let Some(trace) = &best.gamma_trace {
        let shown: Vec<String> = trace.iter().map(|g| format!("{g:.3}")).collect();
        println!("index of each chosen stage: [{}]", shown.join(", "));
    }
    Ok(())
}
