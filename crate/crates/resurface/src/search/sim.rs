//! Seeded Monte Carlo runs of the search process.
//!
//! One run draws the hidden world — does the account exist, which friends did
//! it refollow, and where does it sit in each refollowed friend's follower
//! list — then executes the policy, stopping on a hit, on posterior collapse
//! below `rho_bar`, or on exhaustion. The reported cost is the number of
//! unsuccessful page fetches, matching the analytic
//! [`expected_cost`](crate::search::policy::expected_cost).
//!
//! # Determinism
//!
//! Run `r` uses a dedicated `ChaCha8` stream derived from `(seed, r)`, so
//! results are bit-for-bit identical for a given seed regardless of how many
//! threads execute the runs. Runs are reduced in run order with compensated
//! summation, so the reported mean never depends on scheduling either.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::model::{Policy, SearchInstance};
use crate::search::policy::{self, GroundTruth};

/// Name of the generator family behind every simulation, recorded in reports
/// so archived numbers stay reproducible.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Why a single run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The account turned up on a fetched page.
    Found,
    /// The existence posterior fell strictly below `rho_bar`.
    BelowThreshold,
    /// Every page of every friend was fetched without a hit.
    Exhausted,
}

/// How many runs ended each way.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminationCounts {
    pub found: u64,
    pub below_threshold: u64,
    pub exhausted: u64,
}

impl TerminationCounts {
    fn record(&mut self, termination: Termination) {
        match termination {
            Termination::Found => self.found += 1,
            Termination::BelowThreshold => self.below_threshold += 1,
            Termination::Exhausted => self.exhausted += 1,
        }
    }
}

/// Summary of a batch of simulated searches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    /// Number of runs simulated.
    pub runs: u64,
    /// Sample mean of unsuccessful queries per run.
    pub mean_unsuccessful_queries: f64,
    /// Standard error of the mean (sample standard deviation / sqrt(runs)).
    pub std_error: f64,
    /// Breakdown of how runs terminated.
    pub terminations: TerminationCounts,
    /// Seed the batch was keyed on.
    pub seed: u64,
    /// Generator family, always [`RNG_ALGORITHM`].
    pub rng: String,
}

/// The hidden world of one run, fully drawn before any query executes.
struct World {
    exists: bool,
    /// For each friend (instance order): the page index on which the account
    /// would be found, or `None` if this friend was not refollowed.
    hit_page: Vec<Option<u64>>,
}

fn draw_world(instance: &SearchInstance, truth: Option<&GroundTruth>, rng: &mut ChaCha8Rng) -> World {
    let exists = match truth {
        Some(truth) => truth.exists,
        None => rng.gen_bool(instance.rho0()),
    };
    let mut hit_page = vec![None; instance.len()];
    if exists {
        for (idx, friend) in instance.friends().iter().enumerate() {
            let reconnected = match truth {
                Some(truth) => truth.reconnected.contains(&friend.id),
                None => rng.gen_bool(friend.phi),
            };
            if reconnected {
                // Uniform position among the friend's followers; the page it
                // lands on is the query that would reveal it.
                let position = rng.gen_range(0..friend.followers);
                hit_page[idx] = Some(position / instance.page_size());
            }
        }
    }
    World { exists, hit_page }
}

/// Execute `policy` against a drawn world. Returns the number of
/// unsuccessful queries and the reason the run stopped.
fn execute(instance: &SearchInstance, policy: &Policy, world: &World) -> (u64, Termination) {
    let mut state = instance.initial_state();
    for (stage, &id) in policy.stages().iter().enumerate() {
        // The searcher stops as soon as the posterior — recomputed from the
        // model at every stage — drops strictly below the give-up threshold.
        if instance.existence_probability(&state) < instance.rho_bar() {
            return (stage as u64, Termination::BelowThreshold);
        }
        let idx = instance.index_of(id).expect("policy validated before runs");
        if world.exists && world.hit_page[idx] == Some(state.count_at(idx)) {
            // A hit costs nothing: only unsuccessful fetches are counted.
            return (stage as u64, Termination::Found);
        }
        instance
            .record_query(&mut state, id)
            .expect("policy validated before runs");
    }
    (policy.len() as u64, Termination::Exhausted)
}

fn simulate_worlds(
    instance: &SearchInstance,
    policies: &[Policy],
    truth: Option<&GroundTruth>,
    runs: u64,
    seed: u64,
) -> Result<SimReport> {
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be at least 1".into()));
    }
    if policies.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one policy is required".into(),
        ));
    }
    if policies.iter().any(|policy| !policy::is_valid(instance, policy)) {
        return Err(Error::InvalidPolicy(
            "simulation requires valid policies".into(),
        ));
    }
    if let Some(truth) = truth {
        truth.validate(instance)?;
    }

    // Each run owns stream `r` of the seeded generator, so the batch is
    // reproducible under any parallel schedule.
    let outcomes: Vec<(u64, Termination)> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(run);
            let world = draw_world(instance, truth, &mut rng);
            let policy = &policies[(run % policies.len() as u64) as usize];
            execute(instance, policy, &world)
        })
        .collect();

    let mut terminations = TerminationCounts::default();
    for &(_, termination) in &outcomes {
        terminations.record(termination);
    }
    let mean = kahan_mean(outcomes.iter().map(|&(cost, _)| cost as f64));
    let std_error = if runs > 1 {
        let sum_sq = kahan_sum(
            outcomes
                .iter()
                .map(|&(cost, _)| (cost as f64 - mean) * (cost as f64 - mean)),
        );
        (sum_sq / (runs - 1) as f64).sqrt() / (runs as f64).sqrt()
    } else {
        0.0
    };

    Ok(SimReport {
        runs,
        mean_unsuccessful_queries: mean,
        std_error,
        terminations,
        seed,
        rng: RNG_ALGORITHM.to_string(),
    })
}

/// Simulate `runs` searches with all hidden variables random: existence
/// `rho0`, refollows `phi_i`, and a uniform position per refollowed friend.
///
/// # Errors
///
/// Rejects zero runs and invalid policies.
pub fn simulate(
    instance: &SearchInstance,
    policy: &Policy,
    runs: u64,
    seed: u64,
) -> Result<SimReport> {
    simulate_worlds(instance, std::slice::from_ref(policy), None, runs, seed)
}

/// Simulate a policy ensemble: run `r` executes `policies[r % policies.len()]`,
/// so the reported mean estimates the average cost of a policy drawn uniformly
/// from the ensemble. Worlds are drawn exactly as in [`simulate`], and a
/// single-policy ensemble reproduces [`simulate`] bit for bit.
///
/// # Errors
///
/// Rejects zero runs, an empty ensemble, and any invalid member policy.
pub fn simulate_mixture(
    instance: &SearchInstance,
    policies: &[Policy],
    runs: u64,
    seed: u64,
) -> Result<SimReport> {
    simulate_worlds(instance, policies, None, runs, seed)
}

/// Simulate with existence and refollows pinned to `truth`; only the position
/// of the account within each refollowed friend's follower list is drawn.
///
/// # Errors
///
/// Rejects zero runs, invalid policies, and truths inconsistent with the
/// instance.
pub fn simulate_given_truth(
    instance: &SearchInstance,
    policy: &Policy,
    truth: &GroundTruth,
    runs: u64,
    seed: u64,
) -> Result<SimReport> {
    simulate_worlds(instance, std::slice::from_ref(policy), Some(truth), runs, seed)
}

/// Compensated (Kahan) sum, evaluated strictly in iteration order.
fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for value in values {
        let y = value - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

fn kahan_mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let count = values.len() as f64;
    kahan_sum(values) / count
}
