//! Instances, query states, and the probability kernel of the search.
//!
//! Friend `i` has `followers_i` followers served in pages of `page_size`, so
//! it takes `pages_i = ceil(followers_i / page_size)` queries to see them all.
//! After `x_i` queries the *queried fraction* of friend `i` is
//!
//! ```text
//! psi_i = x_i * page_size / followers_i   while x_i < pages_i,
//! psi_i = 1                               once  x_i = pages_i,
//! ```
//!
//! (the last page is usually a partial one, so the fraction jumps to exactly 1
//! on the final query). Conditioned on the searched-for account existing (“A”)
//! and not yet having been found, the chance that the next page of friend `i`
//! contains it is a ratio of unqueried follower slots; the complementary
//! failure probability drives both the expected-cost formula and the posterior
//! existence probability
//!
//! ```text
//! rho(t) = rho0 * prod_i (1 - psi_i * phi_i)
//!          ------------------------------------------
//!          1 - rho0 + rho0 * prod_i (1 - psi_i * phi_i)
//! ```
//!
//! which starts at `rho0` and can only fall as pages are consumed.
//!
//! All operations take the instance plus an explicit [`SearchState`], so
//! policies can probe hypothetical states freely.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One friend of the vanished user: an id, a follower count, and the
/// probability `phi` that the returning account refollows them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FriendSpec {
    /// Stable identifier, unique within an instance. Policies are sequences
    /// of these ids.
    pub id: u64,
    /// Number of followers of this friend (at least 1).
    pub followers: u64,
    /// Probability in `[0, 1]` that the returning account refollows this
    /// friend.
    pub phi: f64,
}

/// A fully validated search problem: the friend set, the follower page size,
/// the prior `rho0` that the account exists, and the stopping threshold
/// `rho_bar` under which the search gives up.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchInstance {
    friends: Vec<FriendSpec>,
    page_size: u64,
    rho0: f64,
    rho_bar: f64,
}

/// Raw mirror of [`SearchInstance`] used to validate on deserialization.
#[derive(Deserialize)]
struct RawInstance {
    friends: Vec<RawFriend>,
    page_size: u64,
    rho0: f64,
    rho_bar: f64,
}

#[derive(Deserialize)]
struct RawFriend {
    id: u64,
    followers: u64,
    phi: f64,
}

impl<'de> Deserialize<'de> for SearchInstance {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let raw = RawInstance::deserialize(deserializer)?;
        let friends = raw
            .friends
            .into_iter()
            .map(|f| FriendSpec {
                id: f.id,
                followers: f.followers,
                phi: f.phi,
            })
            .collect();
        SearchInstance::new(friends, raw.page_size, raw.rho0, raw.rho_bar)
            .map_err(serde::de::Error::custom)
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::ProbabilityOutOfRange { name, value })
    }
}

impl SearchInstance {
    /// Validate and build an instance.
    ///
    /// # Errors
    ///
    /// Rejects an empty friend set, duplicate friend ids, a zero page size,
    /// zero-follower friends, and any probability outside `[0, 1]`.
    pub fn new(
        friends: Vec<FriendSpec>,
        page_size: u64,
        rho0: f64,
        rho_bar: f64,
    ) -> Result<Self> {
        if friends.is_empty() {
            return Err(Error::InvalidInstance("friend set is empty".into()));
        }
        if page_size == 0 {
            return Err(Error::InvalidInstance("page size must be at least 1".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for friend in &friends {
            if friend.followers == 0 {
                return Err(Error::InvalidInstance(format!(
                    "friend {} has zero followers",
                    friend.id
                )));
            }
            check_probability("phi", friend.phi)?;
            if !seen.insert(friend.id) {
                return Err(Error::InvalidInstance(format!(
                    "duplicate friend id {}",
                    friend.id
                )));
            }
        }
        check_probability("rho0", rho0)?;
        check_probability("rho_bar", rho_bar)?;
        Ok(SearchInstance {
            friends,
            page_size,
            rho0,
            rho_bar,
        })
    }

    /// The friends, in construction order.
    pub fn friends(&self) -> &[FriendSpec] {
        &self.friends
    }

    /// Follower page size `N_M`.
    pub fn page_size(&self) -> u64 {
        self.page_size
    }

    /// Prior probability that the searched-for account exists.
    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    /// Posterior threshold below which the search stops early.
    pub fn rho_bar(&self) -> f64 {
        self.rho_bar
    }

    /// Number of friends.
    pub fn len(&self) -> usize {
        self.friends.len()
    }

    /// Always false: instances reject empty friend sets at construction.
    pub fn is_empty(&self) -> bool {
        self.friends.is_empty()
    }

    /// Position of `friend_id` in [`Self::friends`].
    ///
    /// # Errors
    ///
    /// [`Error::UnknownFriend`] if the id is not part of the instance.
    pub fn index_of(&self, friend_id: u64) -> Result<usize> {
        self.friends
            .iter()
            .position(|f| f.id == friend_id)
            .ok_or(Error::UnknownFriend(friend_id))
    }

    /// Queries needed to page through all of `friend_id`'s followers,
    /// `ceil(followers / page_size)`.
    pub fn pages(&self, friend_id: u64) -> Result<u64> {
        let friend = &self.friends[self.index_of(friend_id)?];
        Ok(pages_of(friend.followers, self.page_size))
    }

    /// Total queries over all friends; the length of every valid policy.
    pub fn total_queries(&self) -> u64 {
        self.friends
            .iter()
            .map(|f| pages_of(f.followers, self.page_size))
            .sum()
    }

    /// The all-zero query state.
    pub fn initial_state(&self) -> SearchState {
        SearchState {
            counts: vec![0; self.friends.len()],
        }
    }

    /// Record one query of `friend_id` in `state`.
    ///
    /// # Errors
    ///
    /// [`Error::UnknownFriend`] for an id outside the instance,
    /// [`Error::FriendExhausted`] if all of the friend's pages are used up.
    pub fn record_query(&self, state: &mut SearchState, friend_id: u64) -> Result<()> {
        let idx = self.index_of(friend_id)?;
        let friend = &self.friends[idx];
        if state.counts[idx] >= pages_of(friend.followers, self.page_size) {
            return Err(Error::FriendExhausted(friend_id));
        }
        state.counts[idx] += 1;
        Ok(())
    }

    /// Fraction of `friend_id`'s followers already paged through: strictly
    /// increasing in the query count and exactly 1 once the friend is
    /// exhausted.
    pub fn queried_fraction(&self, state: &SearchState, friend_id: u64) -> Result<f64> {
        let idx = self.index_of(friend_id)?;
        state.check_len(self.friends.len());
        Ok(self.psi(state.counts[idx], &self.friends[idx]))
    }

    fn psi(&self, queries: u64, friend: &FriendSpec) -> f64 {
        if queries >= pages_of(friend.followers, self.page_size) {
            1.0
        } else {
            (queries * self.page_size) as f64 / friend.followers as f64
        }
    }

    /// `prod_i (1 - psi_i * phi_i)`, the chance that none of the queried
    /// pages contained the account, given it exists. Clamped at 0 to absorb
    /// round-off.
    fn not_found_given_exists(&self, state: &SearchState) -> f64 {
        state.check_len(self.friends.len());
        let mut prod = 1.0;
        for (idx, friend) in self.friends.iter().enumerate() {
            prod *= 1.0 - self.psi(state.counts[idx], friend) * friend.phi;
            if prod <= 0.0 {
                return 0.0;
            }
        }
        prod
    }

    /// Posterior probability that the searched-for account exists, given that
    /// every query so far came back empty.
    ///
    /// Equals `rho0` at the initial state and never increases as queries are
    /// recorded. With `rho0 = 1` it stays exactly 1 until some fully queried
    /// friend has `phi = 1`, at which point an empty search is contradictory
    /// and the posterior collapses to 0.
    pub fn existence_probability(&self, state: &SearchState) -> f64 {
        let prod = self.not_found_given_exists(state);
        if prod == 0.0 {
            return 0.0;
        }
        self.rho0 * prod / (1.0 - self.rho0 + self.rho0 * prod)
    }

    /// Probability that `friend_id` was refollowed, conditioned on the
    /// account existing and every query so far having come back empty:
    /// `phi * (1 - psi) / (1 - psi * phi)`.
    ///
    /// Equals `phi` while the friend is unqueried and 0 once exhausted.
    pub fn conditional_reconnection(&self, state: &SearchState, friend_id: u64) -> Result<f64> {
        let idx = self.index_of(friend_id)?;
        state.check_len(self.friends.len());
        let friend = &self.friends[idx];
        let queries = state.counts[idx];
        if queries >= pages_of(friend.followers, self.page_size) {
            return Ok(0.0);
        }
        // Same ratio as phi*(1-psi)/(1-psi*phi) with numerator and
        // denominator scaled by the follower count, keeping the arithmetic on
        // near-integers.
        let n = friend.followers as f64;
        let queried = (queries * self.page_size) as f64;
        Ok(friend.phi * (n - queried) / (n - friend.phi * queried))
    }

    /// Probability that the *next* page of `friend_id` contains the account,
    /// conditioned on it existing and all earlier queries having failed.
    ///
    /// For a non-final page this is `phi * page_size / (followers - phi *
    /// queried)`; the final, possibly partial page covers only the
    /// `followers - queried` remaining slots.
    ///
    /// # Errors
    ///
    /// [`Error::FriendExhausted`] when the friend has no pages left (there is
    /// no next query to succeed).
    pub fn success_probability_given_a(
        &self,
        state: &SearchState,
        friend_id: u64,
    ) -> Result<f64> {
        let idx = self.index_of(friend_id)?;
        state.check_len(self.friends.len());
        let friend = &self.friends[idx];
        let queries = state.counts[idx];
        let pages = pages_of(friend.followers, self.page_size);
        if queries >= pages {
            return Err(Error::FriendExhausted(friend_id));
        }
        let n = friend.followers as f64;
        let queried = (queries * self.page_size) as f64;
        let denom = n - friend.phi * queried;
        if queries < pages - 1 {
            Ok(friend.phi * self.page_size as f64 / denom)
        } else {
            Ok(friend.phi * (n - queried) / denom)
        }
    }

    /// Complement of [`Self::success_probability_given_a`] for the same
    /// query: the chance the next page of `friend_id` comes back empty, given
    /// the account exists. The two always sum to 1 (to machine precision).
    ///
    /// # Errors
    ///
    /// [`Error::FriendExhausted`] when the friend has no pages left.
    pub fn failure_probability_given_a(
        &self,
        state: &SearchState,
        friend_id: u64,
    ) -> Result<f64> {
        let idx = self.index_of(friend_id)?;
        state.check_len(self.friends.len());
        let friend = &self.friends[idx];
        let queries = state.counts[idx];
        let pages = pages_of(friend.followers, self.page_size);
        if queries >= pages {
            return Err(Error::FriendExhausted(friend_id));
        }
        let n = friend.followers as f64;
        let queried = (queries * self.page_size) as f64;
        let denom = n - friend.phi * queried;
        if queries < pages - 1 {
            Ok((denom - friend.phi * self.page_size as f64) / denom)
        } else {
            Ok((1.0 - friend.phi) * n / denom)
        }
    }

    /// Probability that the next page of `friend_id` contains the account,
    /// *without* conditioning on existence: the success probability given
    /// existence times the current existence posterior.
    ///
    /// # Errors
    ///
    /// [`Error::FriendExhausted`] when the friend has no pages left.
    pub fn unconditional_success_probability(
        &self,
        state: &SearchState,
        friend_id: u64,
    ) -> Result<f64> {
        let success = self.success_probability_given_a(state, friend_id)?;
        Ok(success * self.existence_probability(state))
    }
}

/// `ceil(followers / page_size)` without overflow for realistic counts.
pub(crate) fn pages_of(followers: u64, page_size: u64) -> u64 {
    followers.div_ceil(page_size)
}

/// How many times each friend has been queried. Produced by
/// [`SearchInstance::initial_state`] and advanced by
/// [`SearchInstance::record_query`]; meaningful only with the instance that
/// created it (mixing instances panics).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchState {
    counts: Vec<u64>,
}

impl SearchState {
    /// Query count for the friend at `index` (instance order).
    pub fn count_at(&self, index: usize) -> u64 {
        self.counts[index]
    }

    /// Total queries recorded so far.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Undo one recorded query of the friend at `index` (backtracking inside
    /// the brute-force enumerator only).
    pub(crate) fn retract_query(&mut self, index: usize) {
        debug_assert!(self.counts[index] > 0, "retracting a query that never ran");
        self.counts[index] -= 1;
    }

    fn check_len(&self, expected: usize) {
        assert_eq!(
            self.counts.len(),
            expected,
            "state built for a different instance ({} friends, expected {})",
            self.counts.len(),
            expected
        );
    }
}

/// A query order: the friend id fetched at each stage. Valid for an instance
/// when every friend appears exactly as many times as it has pages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Policy(pub Vec<u64>);

impl Policy {
    /// The friend ids in execution order.
    pub fn stages(&self) -> &[u64] {
        &self.0
    }

    /// Number of stages.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Whether the policy has no stages.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<u64>> for Policy {
    fn from(stages: Vec<u64>) -> Self {
        Policy(stages)
    }
}
