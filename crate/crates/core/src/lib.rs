//! Exact graph similarity search under graph edit distance (GED).
//!
//! Threshold queries are answered by scanning label-filtered candidates,
//! verifying each with a best-first GED search, and regenerating the
//! candidate set from a precomputed pairwise-GED index every time a result is
//! found.
//!
//! * [`graph`]: labeled graphs, label multisets, database I/O, synthetic data.
//! * [`ged`]: threshold GED with cascaded lower bounds and a bound cache.
//! * [`partition`]: online partitioning, subgraph isomorphism, `lb_P`.
//! * [`index`]: parallel pairwise index construction and persistence.
//! * [`search`]: the query algorithm and its linear-scan baseline.

pub mod graph;

pub use graph::{gamma, lb_label, Graph, GraphDatabase, Label, LabelMultiset};
pub mod ged;
pub mod index;
pub mod partition;
pub mod search;

pub use ged::{brute_force_ged, nass_ged, nass_ged_with, GedOptions, GedOutcome};
pub use index::{build_index, BuildConfig, GedIndex, IndexEntry, IndexError};
pub use search::{
    initial_candidates, linear_scan, nass_search, CandidateSet, Query, QueryStats, SearchResult,
};
