//! Match graphs over a profile corpus.
//!
//! Every profile is a node; an edge connects each pair the match model
//! classifies as the same person. Connected components then group the
//! candidate identities. Because the naive construction compares all pairs,
//! it is O(n²) and guarded by a cap; 3-gram *blocking* — only comparing pairs
//! that share a character trigram in either name field — trades a little
//! recall for scale. (A pair can only score above any useful threshold
//! through name similarity, so sharing no trigram almost always means no
//! edge.)
//!
//! [`threshold_sweep`] rebuilds the graph across a grid of probability
//! cutoffs and reports, per cutoff: how many accounts keep at least one
//! match, the size of the largest component, and the average local
//! clustering coefficient (nodes of degree < 2 contribute 0).

use std::collections::{BTreeSet, HashMap};

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::matching::{
    compare_profiles_with, match_probability, MatchModel, ProfileRecord,
};
use crate::profile::text::RatioVariant;

/// Options for match-graph construction.
#[derive(Debug, Clone, Copy)]
pub struct ClusterOptions {
    /// Refuse all-pairs comparison beyond this many profiles unless
    /// `blocking` is on.
    pub max_profiles: usize,
    /// Compare only pairs sharing a character 3-gram in the screen name or
    /// display name.
    pub blocking: bool,
    /// Similarity-ratio variant for the underlying comparisons.
    pub ratio_variant: RatioVariant,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            max_profiles: 2_000,
            blocking: false,
            ratio_variant: RatioVariant::IndelWeighted,
        }
    }
}

/// A built match graph. Nodes are indices into the profile slice the graph
/// was built from; edges and component members are sorted, so equal inputs
/// produce identical graphs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterGraph {
    /// Number of nodes (always the full profile count; isolated accounts are
    /// nodes too).
    pub node_count: usize,
    /// Matched pairs, each `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Connected components, each sorted ascending, ordered by smallest
    /// member. Singleton components are included.
    pub components: Vec<Vec<usize>>,
}

impl ClusterGraph {
    /// Size of the largest component (0 for an empty graph).
    pub fn giant_component_size(&self) -> usize {
        self.components.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Number of nodes with at least one incident edge.
    pub fn connected_account_count(&self) -> usize {
        let mut connected = BTreeSet::new();
        for &(i, j) in &self.edges {
            connected.insert(i);
            connected.insert(j);
        }
        connected.len()
    }

    /// Mean local clustering coefficient over all nodes; a node of degree
    /// less than 2 contributes 0.
    pub fn average_clustering(&self) -> f64 {
        if self.node_count == 0 {
            return 0.0;
        }
        let mut neighbors: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.node_count];
        for &(i, j) in &self.edges {
            neighbors[i].insert(j);
            neighbors[j].insert(i);
        }
        let total: f64 = neighbors
            .iter()
            .map(|adjacent| {
                let degree = adjacent.len();
                if degree < 2 {
                    return 0.0;
                }
                let mut closed = 0usize;
                for &u in adjacent {
                    for &v in adjacent.range((u + 1)..) {
                        if neighbors[u].contains(&v) {
                            closed += 1;
                        }
                    }
                }
                2.0 * closed as f64 / (degree * (degree - 1)) as f64
            })
            .sum();
        total / self.node_count as f64
    }
}

/// Character 3-grams of a string (whole string when shorter than 3 chars, so
/// short names still land in a block).
fn trigrams(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    if chars.len() < 3 {
        return vec![chars.iter().collect()];
    }
    chars.windows(3).map(|w| w.iter().collect()).collect()
}

/// Candidate pairs under 3-gram blocking: all `(i, j)` sharing at least one
/// trigram in screen name or display name.
fn blocked_pairs(profiles: &[ProfileRecord]) -> Vec<(usize, usize)> {
    let mut buckets: HashMap<String, Vec<usize>> = HashMap::new();
    for (idx, profile) in profiles.iter().enumerate() {
        let mut grams = trigrams(&profile.screen_name);
        grams.extend(trigrams(&profile.name));
        grams.sort();
        grams.dedup();
        for gram in grams {
            buckets.entry(gram).or_default().push(idx);
        }
    }
    let mut pairs = BTreeSet::new();
    for bucket in buckets.values() {
        for (pos, &i) in bucket.iter().enumerate() {
            for &j in &bucket[pos + 1..] {
                pairs.insert((i.min(j), i.max(j)));
            }
        }
    }
    pairs.into_iter().collect()
}

/// Pairs the graph builder would score: all `i < j` pairs, or only the
/// blocked candidates when `options.blocking` is set. The profile cap is
/// enforced here for the all-pairs path.
pub(crate) fn candidate_pairs(
    profiles: &[ProfileRecord],
    options: &ClusterOptions,
) -> Result<Vec<(usize, usize)>> {
    if options.blocking {
        return Ok(blocked_pairs(profiles));
    }
    if profiles.len() > options.max_profiles {
        return Err(Error::TooManyProfiles {
            count: profiles.len(),
            cap: options.max_profiles,
        });
    }
    let mut pairs = Vec::with_capacity(profiles.len() * profiles.len().saturating_sub(1) / 2);
    for i in 0..profiles.len() {
        for j in (i + 1)..profiles.len() {
            pairs.push((i, j));
        }
    }
    Ok(pairs)
}

/// Match probabilities for every candidate pair, computed in parallel but
/// returned in pair order (deterministic regardless of thread count).
fn pair_probabilities(
    profiles: &[ProfileRecord],
    model: &MatchModel,
    pairs: &[(usize, usize)],
    variant: RatioVariant,
) -> Result<Vec<f64>> {
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let features = compare_profiles_with(&profiles[i], &profiles[j], variant)?;
            Ok(match_probability(model, &features))
        })
        .collect()
}

fn components_from_edges(node_count: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut forest = UnionFind::<usize>::new(node_count);
    for &(i, j) in edges {
        forest.union(i, j);
    }
    let mut by_root: HashMap<usize, Vec<usize>> = HashMap::new();
    for node in 0..node_count {
        by_root.entry(forest.find(node)).or_default().push(node);
    }
    let mut components: Vec<Vec<usize>> = by_root.into_values().collect();
    for component in &mut components {
        component.sort_unstable();
    }
    components.sort_by_key(|component| component[0]);
    components
}

/// Build the match graph of `profiles` under `model`, classifying each
/// candidate pair at `threshold` (which overrides the model's own).
///
/// # Errors
///
/// [`Error::TooManyProfiles`] when all-pairs comparison would exceed the cap
/// and blocking is off; image-fingerprint failures propagate.
pub fn build_cluster_graph(
    profiles: &[ProfileRecord],
    model: &MatchModel,
    threshold: f64,
    options: &ClusterOptions,
) -> Result<ClusterGraph> {
    let pairs = candidate_pairs(profiles, options)?;
    let probabilities = pair_probabilities(profiles, model, &pairs, options.ratio_variant)?;
    let edges: Vec<(usize, usize)> = pairs
        .iter()
        .zip(&probabilities)
        .filter(|&(_, &p)| p >= threshold)
        .map(|(&pair, _)| pair)
        .collect();
    let components = components_from_edges(profiles.len(), &edges);
    Ok(ClusterGraph {
        node_count: profiles.len(),
        edges,
        components,
    })
}

/// Graph summary at one probability cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    /// The probability cutoff this row was computed at.
    pub threshold: f64,
    /// Accounts with at least one match at this cutoff.
    pub connected_accounts: usize,
    /// Size of the largest connected component.
    pub giant_component: usize,
    /// Mean local clustering coefficient (degree < 2 counts 0).
    pub average_clustering: f64,
}

/// Sweep the match-graph summary across probability cutoffs. Pair features
/// and probabilities are computed once and re-thresholded per cutoff.
///
/// # Errors
///
/// Same conditions as [`build_cluster_graph`].
pub fn threshold_sweep(
    profiles: &[ProfileRecord],
    model: &MatchModel,
    thresholds: &[f64],
    options: &ClusterOptions,
) -> Result<Vec<SweepPoint>> {
    let pairs = candidate_pairs(profiles, options)?;
    let probabilities = pair_probabilities(profiles, model, &pairs, options.ratio_variant)?;
    Ok(thresholds
        .iter()
        .map(|&threshold| {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .zip(&probabilities)
                .filter(|&(_, &p)| p >= threshold)
                .map(|(&pair, _)| pair)
                .collect();
            let components = components_from_edges(profiles.len(), &edges);
            let graph = ClusterGraph {
                node_count: profiles.len(),
                edges,
                components,
            };
            SweepPoint {
                threshold,
                connected_accounts: graph.connected_account_count(),
                giant_component: graph.giant_component_size(),
                average_clustering: graph.average_clustering(),
            }
        })
        .collect())
}
