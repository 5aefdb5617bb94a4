//! Expected vs. realized vs. simulated cost, side by side.
//!
//! Three views of the same quantity: the analytic expectation over all
//! hidden worlds, the realized cost in one pinned world, and a Monte Carlo
//! estimate. The table mirrors what `resurface search` prints from the
//! command line.
//!
//! Run with: `cargo run --example policy_table`

use resurface::search::model::{FriendSpec, SearchInstance};
use resurface::search::policy::{
    actual_cost, greedy_policy, max_p_policy, min_n_policy, optimal_policy, random_policy,
    GroundTruth,
};
use resurface::search::sim::simulate;

fn main() -> resurface::Result<()> {
    let instance = SearchInstance::new(
        vec![
            FriendSpec { id: 0, followers: 9_500, phi: 0.75 },
            FriendSpec { id: 1, followers: 2_000, phi: 0.50 },
            FriendSpec { id: 2, followers: 14_000, phi: 0.15 },
        ],
        5_000,
        0.9,
        0.0,
    )?;
    // The world that actually happened: the user came back and refollowed
    // friends 0 and 2 (but not 1).
    let truth = GroundTruth::present([0, 2]);
    let runs = 50_000;
    let seed = 5;

    println!("{:<10}  {:>9}  {:>9}  {:>9}  {:>7}", "policy", "expected", "realized", "sim mean", "sim se");
    let mut rows = vec![
        ("optimal", optimal_policy(&instance)),
        ("greedy", greedy_policy(&instance)),
        ("min-n", min_n_policy(&instance)),
        ("max-p", max_p_policy(&instance)),
    ];
    // One uniformly drawn interleaving for scale.
    rows.push(("random", random_policy(&instance, seed)));

    for (name, report) in &rows {
        let realized = actual_cost(&instance, &report.policy, &truth)?;
        let sim = simulate(&instance, &report.policy, runs, seed)?;
        println!(
            "{name:<10}  {:>9.4}  {:>9.4}  {:>9.4}  {:>7.4}",
            report.expected_cost, realized, sim.mean_unsuccessful_queries, sim.std_error
        );
    }

    let optimal = &rows[0].1;
    println!(
        "\norder of the optimal policy: {:?}",
        optimal.policy.stages()
    );
    println!(
        "realized cost conditions on one world; expected cost averages over \
         all of them,\nso a lucky world can make a worse policy look better \
         — the expectation cannot."
    );
    Ok(())
}
