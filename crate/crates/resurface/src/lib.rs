//! Find users who were kicked off a social network and came back under a new
//! name.
//!
//! The crate has two halves that meet in the middle:
//!
//! * **Search** ([`search`]) — a user `u` follows friends `1..n`; if `u` was
//!   suspended and returned, the new account refollows friend `i` with
//!   probability `φ_i`, and we can page through friend `i`'s follower list
//!   `N_M` accounts at a time. The [`search::model`] module is the probability
//!   kernel of that process, [`search::policy`] builds query orders (including
//!   the provably cost-optimal one and a brute-force cross-check), and
//!   [`search::sim`] estimates costs by seeded Monte Carlo.
//! * **Matching & learning** ([`profile`], [`learn`], [`featurize`]) — decide
//!   whether two profiles are the same person (weighted edit-distance ratios,
//!   64-bit average-hash image fingerprints, a logistic match model, cluster
//!   graphs and threshold sweeps), and fit the models that feed the search:
//!   an L1-regularized logistic classifier and a quadratic-kernel logistic
//!   classifier whose predictions become the `φ_i` above.
//!
//! [`commands`] wires both halves to files on disk, and the `resurface` binary
//! is a thin argument parser over it.
//!
//! # Start with the examples
//!
//! Each major capability has a runnable walkthrough under `examples/`:
//!
//! ```text
//! cargo run --example search_policies    # build an instance, compare query policies
//! cargo run --example simulate_search    # Monte Carlo costs, early stopping, determinism
//! cargo run --example policy_table       # expected vs. realized vs. simulated cost table
//! cargo run --example profile_matching   # similarity features and match probabilities
//! cargo run --example cluster_graph      # match graph, components, threshold sweep
//! cargo run --example train_match_model  # L1 logistic regression + ROC/AUC on pair data
//! cargo run --example refollow_kernel    # kernel logistic regression end to end
//! ```
//!
//! The same flows are scriptable through the binary:
//!
//! ```text
//! resurface --workspace ws instance --user 42
//! resurface --workspace ws search --instance ws/instances/user_42.json
//! ```
//!
//! # Conventions
//!
//! * Every randomized routine takes an explicit `u64` seed and is bit-for-bit
//!   reproducible for the same inputs, seed, and thread count — including
//!   across thread counts, because per-run generators are derived from
//!   `(seed, run index)`.
//! * Probabilities are `f64` in `[0, 1]`; constructors validate rather than
//!   clamp. Misuse that code in this crate could only cause itself (mixing a
//!   state from one instance into another) panics instead of returning `Err`.
//! * Output files are written atomically (temp file + rename) so a crashed
//!   run never leaves a half-written report.

pub mod commands;
pub mod error;
pub mod featurize;
pub mod io;
pub mod learn;
pub mod profile;
pub mod search;

pub use error::{Error, Result};
