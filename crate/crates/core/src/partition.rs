//! Online partitioning of a graph against a host graph and the resulting
//! partition-based GED lower bound.
//!
//! The partitioned graph is cut into vertex-disjoint connected fragments of
//! at most [`MAX_PARTITION_SIZE`] vertices. Every fragment that does not embed
//! into the host needs at least one edit of its own, so the number of such
//! fragments bounds the GED from below.

use std::collections::VecDeque;

use crate::graph::{Graph, Label};

/// Upper limit on fragment size.
pub const MAX_PARTITION_SIZE: usize = 6;

/// A connected fragment of the partitioned graph, in growth order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub vertices: Vec<usize>,
    /// Whether the fragment is subgraph isomorphic to the host.
    pub embeds: bool,
}

/// Progress of one partitioning run; can be resumed with a larger stop bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionState {
    partitions: Vec<Partition>,
    consumed: Vec<bool>,
    non_isomorphic: u32,
    complete: bool,
    stopped_at: Option<u32>,
}

impl PartitionState {
    fn new(g: &Graph) -> Self {
        PartitionState {
            partitions: Vec::new(),
            // Blank vertices never join a fragment.
            consumed: (0..g.order()).map(|v| g.is_blank(v)).collect(),
            non_isomorphic: 0,
            complete: false,
            stopped_at: None,
        }
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    /// True once every vertex has been assigned to a fragment.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Stop bound of the last run that halted early, if it did.
    pub fn stopped_at(&self) -> Option<u32> {
        self.stopped_at
    }

    /// Vertices assigned to fragments so far.
    pub fn consumed_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.partitions
            .iter()
            .flat_map(|p| p.vertices.iter().copied())
    }
}

/// Is there an injective, label-preserving map from `pattern` into `host`
/// under which every pattern edge lands on a host edge with the same label?
///
/// Non-edges of the pattern are unconstrained. Vertices are matched in index
/// order, so patterns grown breadth-first prune early.
pub fn subgraph_iso(pattern: &Graph, host: &Graph) -> bool {
    let k = pattern.order();
    if k == 0 {
        return true;
    }
    if k > host.order() || pattern.num_edges() > host.num_edges() {
        return false;
    }
    // Per-vertex sorted incident edge labels for the containment check.
    let incident = |g: &Graph, v: usize| -> Vec<Label> {
        let mut ls: Vec<Label> = g.neighbors(v).iter().map(|&w| g.edge_label(v, w)).collect();
        ls.sort_unstable();
        ls
    };
    let host_inc: Vec<Vec<Label>> = (0..host.order()).map(|v| incident(host, v)).collect();
    let candidates: Vec<Vec<usize>> = (0..k)
        .map(|p| {
            let need = incident(pattern, p);
            (0..host.order())
                .filter(|&h| {
                    host.vertex_label(h) == pattern.vertex_label(p)
                        && host.degree(h) >= pattern.degree(p)
                        && sorted_contains(&host_inc[h], &need)
                })
                .collect()
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return false;
    }
    let mut map = vec![usize::MAX; k];
    let mut used = vec![false; host.order()];
    extend_embedding(pattern, host, &candidates, 0, &mut map, &mut used)
}

fn sorted_contains(haystack: &[Label], needles: &[Label]) -> bool {
    let mut i = 0;
    for &n in needles {
        while i < haystack.len() && haystack[i] < n {
            i += 1;
        }
        if i == haystack.len() || haystack[i] != n {
            return false;
        }
        i += 1;
    }
    true
}

fn extend_embedding(
    pattern: &Graph,
    host: &Graph,
    candidates: &[Vec<usize>],
    depth: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    if depth == pattern.order() {
        return true;
    }
    'cand: for &h in &candidates[depth] {
        if used[h] {
            continue;
        }
        for &q in pattern.neighbors(depth) {
            if q < depth && host.edge_label(h, map[q]) != pattern.edge_label(depth, q) {
                continue 'cand;
            }
        }
        map[depth] = h;
        used[h] = true;
        if extend_embedding(pattern, host, candidates, depth + 1, map, used) {
            return true;
        }
        used[h] = false;
    }
    map[depth] = usize::MAX;
    false
}

/// Partitions `g` against `host`, stopping once `stop_at + 1` fragments fail
/// to embed.
///
/// Each fragment starts at the lowest-id unconsumed vertex and grows
/// breadth-first (neighbors queued in ascending id). It is closed as soon as
/// it stops embedding into `host`, when it reaches [`MAX_PARTITION_SIZE`]
/// vertices, or when it has no unconsumed neighbor left. Passing a previous
/// state continues where that run halted.
pub fn partition_graph(
    g: &Graph,
    host: &Graph,
    stop_at: u32,
    resume: Option<PartitionState>,
) -> PartitionState {
    let mut st = resume.unwrap_or_else(|| PartitionState::new(g));
    debug_assert_eq!(st.consumed.len(), g.order());
    if st.complete {
        return st;
    }
    st.stopped_at = None;
    let mut next_start = 0;
    loop {
        if st.non_isomorphic > stop_at {
            st.stopped_at = Some(stop_at);
            return st;
        }
        while next_start < st.consumed.len() && st.consumed[next_start] {
            next_start += 1;
        }
        if next_start == st.consumed.len() {
            st.complete = true;
            return st;
        }

        let start = next_start;
        st.consumed[start] = true;
        let mut part = vec![start];
        let mut frontier: VecDeque<usize> = g.neighbors(start).iter().copied().collect();
        let embeds = loop {
            if !subgraph_iso(&g.induced(&part), host) {
                break false;
            }
            if part.len() == MAX_PARTITION_SIZE {
                break true;
            }
            let Some(next) = std::iter::from_fn(|| frontier.pop_front()).find(|&w| !st.consumed[w])
            else {
                break true;
            };
            st.consumed[next] = true;
            part.push(next);
            frontier.extend(g.neighbors(next).iter().copied());
        };
        if !embeds {
            st.non_isomorphic += 1;
        }
        st.partitions.push(Partition {
            vertices: part,
            embeds,
        });
    }
}

/// Number of fragments found not to embed into the host.
pub fn partition_lb(state: &PartitionState) -> u32 {
    state.non_isomorphic
}

/// Vertex order for the GED search tree: fragments of `g` (partitioned
/// against `host`) in emission order, each in growth order, followed by any
/// blank vertices.
pub fn derive_vertex_order(g: &Graph, host: &Graph) -> Vec<usize> {
    let st = partition_graph(g, host, u32::MAX - 1, None);
    let mut order: Vec<usize> = st.consumed_vertices().collect();
    order.extend((0..g.order()).filter(|&v| g.is_blank(v)));
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(labels: &[u32], edges: &[(usize, usize, u32)]) -> Graph {
        let labels = labels.iter().map(|&l| Label(l)).collect();
        let edges: Vec<_> = edges.iter().map(|&(u, v, l)| (u, v, Label(l))).collect();
        Graph::from_parts(0, labels, &edges).unwrap()
    }

    #[test]
    fn single_vertex_embeds_by_label() {
        let host = graph(&[1, 0, 2], &[(0, 1, 0)]);
        assert!(subgraph_iso(&graph(&[0], &[]), &host));
        assert!(!subgraph_iso(&graph(&[5], &[]), &host));
        assert!(subgraph_iso(&graph(&[], &[]), &host));
    }

    #[test]
    fn edge_labels_must_match() {
        // (A)-x-(B) into a host whose only edge is labeled y
        let host = graph(&[0, 1], &[(0, 1, 1)]);
        assert!(!subgraph_iso(&graph(&[0, 1], &[(0, 1, 0)]), &host));
        assert!(subgraph_iso(&graph(&[0, 1], &[(0, 1, 1)]), &host));
    }

    #[test]
    fn non_induced_semantics() {
        // A path embeds into a triangle even though the triangle has the extra edge.
        let tri = graph(&[0, 0, 0], &[(0, 1, 0), (1, 2, 0), (0, 2, 0)]);
        let path = graph(&[0, 0, 0], &[(0, 1, 0), (1, 2, 0)]);
        assert!(subgraph_iso(&path, &tri));
        assert!(!subgraph_iso(&tri, &path));
    }

    #[test]
    fn empty_and_identical_inputs() {
        let empty = graph(&[], &[]);
        let st = partition_graph(&empty, &empty, 0, None);
        assert_eq!(partition_lb(&st), 0);
        assert!(st.partitions().is_empty());
        assert!(st.is_complete());

        let g = graph(
            &[0, 1, 2, 0, 1, 1, 2, 0],
            &[
                (0, 1, 0),
                (1, 2, 1),
                (2, 3, 0),
                (3, 4, 1),
                (4, 5, 0),
                (5, 6, 0),
                (6, 7, 1),
                (0, 7, 0),
            ],
        );
        let st = partition_graph(&g, &g, 10, None);
        assert_eq!(partition_lb(&st), 0);
        assert_eq!(
            st.partitions()
                .iter()
                .map(|p| p.vertices.len())
                .collect::<Vec<_>>(),
            vec![6, 2]
        );
    }

    #[test]
    fn one_failing_fragment_out_of_two() {
        // g2' = {v0:C} + {v1:B - v2:B}; host g1' = {B - B}. The lone C fragment
        // cannot embed, the B-B fragment can.
        let g2 = graph(&[2, 1, 1], &[(1, 2, 0)]);
        let g1 = graph(&[1, 1], &[(0, 1, 0)]);
        let st = partition_graph(&g2, &g1, 10, None);
        assert_eq!(st.partitions().len(), 2);
        assert!(!st.partitions()[0].embeds);
        assert!(st.partitions()[1].embeds);
        assert_eq!(partition_lb(&st), 1);
    }

    #[test]
    fn empty_host_fails_every_fragment() {
        let g = graph(&[0, 0, 1, 1], &[(0, 1, 0), (2, 3, 0)]);
        let host = graph(&[], &[]);
        let st = partition_graph(&g, &host, 100, None);
        // Every single-vertex fragment fails immediately.
        assert_eq!(partition_lb(&st), 4);
    }

    #[test]
    fn stop_and_resume() {
        let g = graph(&[0, 1, 2, 3, 4], &[]);
        let host = graph(&[9], &[]);
        let st = partition_graph(&g, &host, 1, None);
        assert_eq!(partition_lb(&st), 2);
        assert!(!st.is_complete());
        assert_eq!(st.stopped_at(), Some(1));
        let st = partition_graph(&g, &host, 3, Some(st));
        assert_eq!(partition_lb(&st), 4);
        let st = partition_graph(&g, &host, 10, Some(st));
        assert_eq!(partition_lb(&st), 5);
        assert!(st.is_complete());
        assert_eq!(st, partition_graph(&g, &host, 10, None));
    }

    #[test]
    fn vertex_order_examples() {
        let one = graph(&[0], &[]);
        assert_eq!(derive_vertex_order(&one, &one), vec![0]);
        let two = graph(&[0, 1], &[]);
        assert_eq!(derive_vertex_order(&two, &two), vec![0, 1]);
        // BFS growth from vertex 0 visits the neighbor 3 before 1.
        let g = graph(&[0, 0, 0, 0], &[(0, 3, 0), (3, 1, 0), (1, 2, 0)]);
        assert_eq!(derive_vertex_order(&g, &g), vec![0, 3, 1, 2]);
        // Blank padding goes last.
        let padded = g.padded_to(6);
        assert_eq!(derive_vertex_order(&padded, &g), vec![0, 3, 1, 2, 4, 5]);
    }
}
