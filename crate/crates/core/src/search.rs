//! Threshold similarity queries.
//!
//! Candidates passing the label filter are verified in ascending bound
//! order. Each time a result `r` at distance `δ` is found, the index yields
//! results for free (`R(r, τ-δ)`, exact entries only) and a replacement
//! candidate set (`R(r, τ+δ)` minus those), so most of the original
//! candidates are never verified.

use std::collections::{BTreeMap, HashSet};

use crate::ged::{nass_ged_with, GedOptions};
use crate::graph::{gamma, Graph, GraphDatabase};
use crate::index::GedIndex;

#[derive(Clone, Debug)]
pub struct Query {
    pub graph: Graph,
    pub tau: u32,
}

/// Graph ids with their label bound, ascending by bound then id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CandidateSet {
    pub items: Vec<(usize, u32)>,
}

impl CandidateSet {
    pub fn from_unsorted(mut items: Vec<(usize, u32)>) -> Self {
        items.sort_unstable_by_key(|&(g, lb)| (lb, g));
        CandidateSet { items }
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.items.iter().map(|&(g, _)| g)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub initial_candidates: usize,
    /// Verified graphs that were not pruned at the search-tree root.
    pub candidates_verified: usize,
    /// Every graph handed to the GED search, in verification order.
    pub verified: Vec<usize>,
    pub regenerations: usize,
    pub mappings_pushed: u64,
    pub results_from_index: usize,
    pub results_verified: usize,
}

/// One result graph; `distance` is known when the graph was verified.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hit {
    pub id: usize,
    pub distance: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchResult {
    /// Ascending by id.
    pub hits: Vec<Hit>,
    pub stats: QueryStats,
}

impl SearchResult {
    pub fn ids(&self) -> Vec<usize> {
        self.hits.iter().map(|h| h.id).collect()
    }
}

/// Outcome of verifying one candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verification {
    /// The distance, when it is within the threshold.
    pub distance: Option<u32>,
    pub root_pruned: bool,
    pub mappings_pushed: u64,
}

/// All graphs whose label bound to the query is within `tau`.
pub fn initial_candidates(db: &GraphDatabase, q: &Query) -> CandidateSet {
    let qv = q.graph.vertex_multiset();
    let qe = q.graph.edge_multiset();
    let items = db
        .graphs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            (
                i,
                gamma(&qv, &g.vertex_multiset()) + gamma(&qe, &g.edge_multiset()),
            )
        })
        .filter(|&(_, lb)| lb <= q.tau)
        .collect();
    CandidateSet::from_unsorted(items)
}

fn verify_with_ged(q: &Query, g: &Graph) -> Verification {
    let out = nass_ged_with(&q.graph, g, q.tau, &GedOptions::default());
    debug_assert!(out.exact);
    Verification {
        distance: (out.distance <= q.tau).then_some(out.distance),
        root_pruned: out.stats.root_pruned,
        mappings_pushed: out.stats.nodes_pushed,
    }
}

/// Answers `q` exactly using `idx` for candidate regeneration.
pub fn nass_search(db: &GraphDatabase, idx: &GedIndex, q: &Query) -> SearchResult {
    let candidates = initial_candidates(db, q);
    search_candidates(candidates, idx, q.tau, |g| {
        verify_with_ged(q, &db.graphs[g])
    })
}

/// State right after one regeneration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Regeneration {
    /// The result that triggered it and its distance.
    pub result: usize,
    pub delta: u32,
    /// Results known at that point, ascending.
    pub results: Vec<usize>,
    /// The new candidate set, in verification order.
    pub candidates: Vec<usize>,
}

/// The regeneration loop over an arbitrary verifier. `verify` is called at
/// most once per graph.
pub fn search_candidates(
    candidates: CandidateSet,
    idx: &GedIndex,
    tau: u32,
    verify: impl FnMut(usize) -> Verification,
) -> SearchResult {
    run_search(candidates, idx, tau, verify, None)
}

/// [`search_candidates`] that also records every regeneration.
pub fn search_candidates_traced(
    candidates: CandidateSet,
    idx: &GedIndex,
    tau: u32,
    verify: impl FnMut(usize) -> Verification,
) -> (SearchResult, Vec<Regeneration>) {
    let mut trace = Vec::new();
    let res = run_search(candidates, idx, tau, verify, Some(&mut trace));
    (res, trace)
}

fn run_search(
    candidates: CandidateSet,
    idx: &GedIndex,
    tau: u32,
    mut verify: impl FnMut(usize) -> Verification,
    mut trace: Option<&mut Vec<Regeneration>>,
) -> SearchResult {
    let mut stats = QueryStats {
        initial_candidates: candidates.len(),
        ..Default::default()
    };
    let mut results: BTreeMap<usize, Option<u32>> = BTreeMap::new();
    let mut seen: HashSet<usize> = HashSet::new();
    let mut remaining = candidates.items;

    loop {
        let mut found = None;
        for (k, &(g, _)) in remaining.iter().enumerate() {
            if !seen.insert(g) {
                continue;
            }
            stats.verified.push(g);
            let v = verify(g);
            stats.candidates_verified += usize::from(!v.root_pruned);
            stats.mappings_pushed += v.mappings_pushed;
            if let Some(d) = v.distance {
                found = Some((k, g, d));
                break;
            }
        }
        let Some((k, r, delta)) = found else { break };
        if results.insert(r, Some(delta)).is_none() {
            stats.results_verified += 1;
        }
        let rest = remaining.split_off(k + 1);
        let tau_wide = tau + delta;
        if tau_wide <= idx.tau_index() {
            let free = idx
                .neighbors(r, tau - delta, true)
                .expect("tau - delta within tau_index");
            for &a in &free {
                if let std::collections::btree_map::Entry::Vacant(e) = results.entry(a) {
                    e.insert(None);
                    stats.results_from_index += 1;
                }
            }
            let near: HashSet<usize> = idx
                .neighbors(r, tau_wide, false)
                .expect("guarded above")
                .into_iter()
                .collect();
            let free: HashSet<usize> = free.into_iter().collect();
            remaining = rest
                .into_iter()
                .filter(|(g, _)| !seen.contains(g) && near.contains(g) && !free.contains(g))
                .collect();
            stats.regenerations += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.push(Regeneration {
                    result: r,
                    delta,
                    results: results.keys().copied().collect(),
                    candidates: remaining.iter().map(|&(g, _)| g).collect(),
                });
            }
        } else {
            remaining = rest;
        }
    }

    let hits = results
        .into_iter()
        .map(|(id, distance)| Hit { id, distance })
        .collect();
    SearchResult { hits, stats }
}

/// Verifies every label-filtered candidate; no index involved.
pub fn linear_scan(db: &GraphDatabase, q: &Query) -> SearchResult {
    let candidates = initial_candidates(db, q);
    let mut stats = QueryStats {
        initial_candidates: candidates.len(),
        ..Default::default()
    };
    let mut hits = Vec::new();
    for g in candidates.ids() {
        let v = verify_with_ged(q, &db.graphs[g]);
        stats.verified.push(g);
        stats.candidates_verified += usize::from(!v.root_pruned);
        stats.mappings_pushed += v.mappings_pushed;
        if let Some(d) = v.distance {
            hits.push(Hit {
                id: g,
                distance: Some(d),
            });
            stats.results_verified += 1;
        }
    }
    hits.sort_unstable_by_key(|h| h.id);
    SearchResult { hits, stats }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Label;

    /// Ids 1..=9 are g1..g9; id 0 is a filler.
    fn nine_graph_mock() -> GedIndex {
        GedIndex::from_pairs(
            10,
            5,
            &[
                (2, 1, 3, true),
                (2, 4, 3, true),
                (2, 6, 3, true),
                (2, 8, 1, true),
                (4, 1, 4, true),
                (4, 8, 4, true),
            ],
        )
        .unwrap()
    }

    const GED_TABLE: [u32; 10] = [99, 3, 1, 4, 2, 4, 4, 3, 1, 5];

    fn mock_verify(tau: u32) -> impl FnMut(usize) -> Verification {
        move |g| Verification {
            distance: (GED_TABLE[g] <= tau).then_some(GED_TABLE[g]),
            root_pruned: false,
            mappings_pushed: 1,
        }
    }

    #[test]
    fn nine_graph_walkthrough() {
        let c0 = CandidateSet::from_unsorted((1..=8).map(|g| (g, 0)).collect());
        let res = search_candidates(c0, &nine_graph_mock(), 2, mock_verify(2));
        assert_eq!(res.stats.verified, vec![1, 2, 4]);
        assert_eq!(res.ids(), vec![2, 4, 8]);
        assert_eq!(res.stats.regenerations, 2);
        assert_eq!(res.stats.results_from_index, 1);
        assert_eq!(res.stats.results_verified, 2);
        assert_eq!(
            res.hits[2],
            Hit {
                id: 8,
                distance: None
            }
        );
    }

    #[test]
    fn wide_results_fall_back_to_scanning() {
        // tau + delta = 3 > tau_index = 2: nothing comes from the index.
        let idx = GedIndex::from_pairs(10, 2, &[(2, 8, 1, true)]).unwrap();
        let c0 = CandidateSet::from_unsorted((1..=8).map(|g| (g, 0)).collect());
        let res = search_candidates(c0, &idx, 2, mock_verify(2));
        assert_eq!(res.ids(), vec![2, 4, 8]);
        assert_eq!(res.stats.verified, (1..=8).collect::<Vec<_>>());
        assert_eq!(res.stats.regenerations, 0);
    }

    fn g(labels: &[u32], edges: &[(usize, usize, u32)]) -> Graph {
        let labels = labels.iter().map(|&x| Label(x)).collect();
        let edges: Vec<_> = edges.iter().map(|&(u, v, x)| (u, v, Label(x))).collect();
        Graph::from_parts(0, labels, &edges).unwrap()
    }

    #[test]
    fn trivial_databases() {
        let q = Query {
            graph: g(&[0, 1], &[(0, 1, 0)]),
            tau: 0,
        };
        assert!(linear_scan(&GraphDatabase::default(), &q).hits.is_empty());
        let db = GraphDatabase {
            graphs: vec![q.graph.clone()],
            ..Default::default()
        };
        assert_eq!(linear_scan(&db, &q).ids(), vec![0]);
        let idx = GedIndex::from_pairs(1, 1, &[]).unwrap();
        assert_eq!(nass_search(&db, &idx, &q).ids(), vec![0]);
    }

    #[test]
    fn label_filter_orders_candidates() {
        let q = Query {
            graph: g(&[0, 1], &[(0, 1, 0)]),
            tau: 2,
        };
        let db = GraphDatabase {
            graphs: vec![
                g(&[0, 1, 2], &[(0, 1, 0), (1, 2, 0)]),
                g(&[0, 1], &[(0, 1, 0)]),
                g(&[2, 2, 2, 2], &[]),
                g(&[0, 1], &[]),
            ],
            ..Default::default()
        };
        let c = initial_candidates(&db, &q);
        assert_eq!(c.items, vec![(1, 0), (3, 1), (0, 2)]);
    }
}
