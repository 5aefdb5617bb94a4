//! Deciding whether two account profiles belong to the same person.
//!
//! * [`text`] — edit-distance similarity ratios over names and screen names.
//! * [`raster`] — grayscale images and 64-bit average-hash fingerprints.
//! * [`matching`] — the four comparison features, the logistic match model,
//!   pair classification, and rule-based auto-labeling.
//! * [`cluster`] — the match graph over a whole profile corpus: connected
//!   components, plus threshold sweeps reporting how the graph degrades as
//!   the match cutoff rises.

pub mod cluster;
pub mod matching;
pub mod raster;
pub mod text;

pub use cluster::{ClusterGraph, ClusterOptions, SweepPoint};
pub use matching::{
    ComparisonFeatures, LabelClass, LabelSource, MatchModel, PairLabel, ProfileRecord,
};
pub use raster::Raster;
pub use text::RatioVariant;
