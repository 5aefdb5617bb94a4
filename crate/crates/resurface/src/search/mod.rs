//! The suspended-user search problem: model, query policies, simulation.
//!
//! A user `u` disappeared from the network. If they returned under a new
//! account (prior probability `rho0`), that account refollows each of `u`'s
//! former friends independently — friend `i` with probability `phi_i`. We may
//! fetch follower pages (`page_size` accounts each) of any friend, and we want
//! to find the new account with as few page fetches as possible.
//!
//! * [`model`] — instances, query states, and the exact probability kernel
//!   (existence posterior, per-query success/failure odds).
//! * [`policy`] — query-order constructors (optimal, greedy, fewest-followers,
//!   highest-reconnection, random), analytic expected cost, realized expected
//!   cost against a known ground truth, and a brute-force enumerator used as
//!   an oracle for the optimal policy.
//! * [`sim`] — seeded Monte Carlo runs of the whole search process.

pub mod model;
pub mod policy;
pub mod sim;

pub use model::{FriendSpec, Policy, SearchInstance, SearchState};
pub use policy::{GroundTruth, PolicyReport};
pub use sim::{SimReport, Termination, TerminationCounts};
