//! Threshold graph edit distance.
//!
//! [`nass_ged`] runs a best-first search over partial vertex mappings. Each
//! mapping is bounded by its edit cost, its bridge cost and a lower bound on
//! the GED between the two unmapped subgraphs; the last part is produced by a
//! cascade of increasingly expensive filters (label multisets, compact
//! branches, partitions) that stops as soon as the mapping can be pruned.
//! Mappings that leave the same unmapped subgraphs share that bound through a
//! cache keyed by the set of mapped `g1` vertices.

pub mod oracle;
mod state;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};

use smallvec::SmallVec;

use crate::graph::{gamma, Graph, Label, LabelMultiset};
use crate::partition::{derive_vertex_order, partition_graph, partition_lb, PartitionState};

pub use oracle::{brute_force_ged, OracleError, BRUTE_FORCE_MAX_VERTICES};
pub use state::{compact_branch_lb_halves, Branch, SideState, UnmappedState};

/// Which unmapped-subgraph filters the cascade may apply. The label filter
/// is always first; disabled filters are skipped but still advance the
/// cascade position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Filters {
    pub label: bool,
    pub branch: bool,
    pub partition: bool,
}

impl Filters {
    pub const ALL: Filters = Filters {
        label: true,
        branch: true,
        partition: true,
    };
    pub const LABEL_ONLY: Filters = Filters {
        label: true,
        branch: false,
        partition: false,
    };
}

impl Default for Filters {
    fn default() -> Self {
        Filters::ALL
    }
}

/// Hook through which an external governor watches and preempts a search.
pub trait SearchMonitor: Sync {
    /// Called after each expansion with the current queue length.
    fn publish_queue_len(&self, len: usize);
    /// Checked before each pop; when true the search returns the smallest
    /// queued lower bound, flagged inexact.
    fn abort_requested(&self) -> bool;
}

/// A bare abort flag, for callers that only need preemption.
#[derive(Debug, Default)]
pub struct AbortFlag(pub AtomicBool);

impl AbortFlag {
    pub fn raised() -> Self {
        AbortFlag(AtomicBool::new(true))
    }
}

impl SearchMonitor for AbortFlag {
    fn publish_queue_len(&self, _len: usize) {}

    fn abort_requested(&self) -> bool {
        self.0.load(AtomicOrdering::Acquire)
    }
}

#[derive(Clone, Copy, Default)]
pub struct GedOptions<'a> {
    pub filters: Filters,
    pub monitor: Option<&'a dyn SearchMonitor>,
    /// Record every bound-cache update in [`GedOutcome::cache_trace`].
    pub trace_cache: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GedStats {
    pub nodes_pushed: u64,
    pub nodes_popped: u64,
    /// Invocations of the label, branch and partition filters.
    pub cascade_calls: [u64; 3],
    /// Times a stopped partitioning was resumed to tighten a cached bound.
    pub partition_resumes: u64,
    /// Mappings pruned by a cached bound without running any filter.
    pub cache_prunes: u64,
    pub cache_entries: usize,
    pub peak_queue: usize,
    /// The root mapping was pruned before any expansion.
    pub root_pruned: bool,
}

/// Key of the bound cache: mapped real `g1` vertices plus the number of
/// mapped blank copies. Two mappings with the same key leave the same
/// unmapped subgraphs in both graphs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CacheKey {
    pub bits: SmallVec<[u64; 2]>,
    pub n_eps: u32,
}

impl CacheKey {
    fn empty(n: usize) -> Self {
        CacheKey {
            bits: SmallVec::from_elem(0, n.div_ceil(64).max(1)),
            n_eps: 0,
        }
    }

    fn with(&self, u: usize, blank: bool) -> Self {
        let mut k = self.clone();
        if blank {
            k.n_eps += 1;
        } else {
            k.bits[u / 64] |= 1 << (u % 64);
        }
        k
    }

    pub fn contains(&self, u: usize) -> bool {
        self.bits[u / 64] & (1 << (u % 64)) != 0
    }

    pub fn popcount(&self) -> u32 {
        self.bits.iter().map(|w| w.count_ones()).sum()
    }
}

/// Cached bound on the GED between one pair of unmapped subgraphs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoundCacheEntry {
    /// Best bound found so far.
    pub lb: u32,
    /// Number of cascade filters already applied (0..=3).
    pub index: u8,
    /// Partitioning progress, kept so a stopped run can be resumed.
    pub partition: Option<PartitionState>,
}

/// One observed state of a cache entry, recorded when tracing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheEvent {
    pub key: CacheKey,
    pub index: u8,
    pub lb: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GedOutcome {
    /// `ged(g1, g2)` when at most `tau`, otherwise `tau + 1`; a lower bound
    /// when `exact` is false.
    pub distance: u32,
    pub exact: bool,
    pub stats: GedStats,
    pub cache_trace: Vec<CacheEvent>,
}

/// Pads the smaller graph with blank vertices so both have the same order.
pub fn pad_graphs(g1: &Graph, g2: &Graph) -> (Graph, Graph) {
    let n = g1.order().max(g2.order());
    (g1.padded_to(n), g2.padded_to(n))
}

/// `|m|! / n_eps!`: how many search-tree nodes share the unmapped subgraphs
/// of a mapping with `mapped` pairs, `n_eps` of them onto blank copies.
/// `None` beyond 20 pairs.
pub fn cache_equivalence_count(mapped: usize, n_eps: usize) -> Option<u64> {
    if mapped > 20 || n_eps > mapped {
        return None;
    }
    Some(((n_eps + 1)..=mapped).map(|k| k as u64).product())
}

#[inline]
fn d(a: Label, b: Label) -> u32 {
    (a != b) as u32
}

/// Edit cost of the mapping `g1_vertices[i] ↦ g2_vertices[i]` over padded
/// graphs, accumulated pair by pair.
pub fn edit_cost(g1: &Graph, g2: &Graph, g1_vertices: &[usize], g2_vertices: &[usize]) -> u32 {
    let mut ec = 0;
    for k in 0..g1_vertices.len() {
        ec = extend_edit_cost(
            ec,
            g1,
            g2,
            &g1_vertices[..k],
            &g2_vertices[..k],
            g1_vertices[k],
            g2_vertices[k],
        );
    }
    ec
}

/// Edit cost after appending `u ↦ v` to a mapping whose cost is `parent`.
#[inline]
pub fn extend_edit_cost(
    parent: u32,
    g1: &Graph,
    g2: &Graph,
    g1_vertices: &[usize],
    g2_vertices: &[usize],
    u: usize,
    v: usize,
) -> u32 {
    let mut ec = parent + d(g1.vertex_label(u), g2.vertex_label(v));
    for (&a, &b) in g1_vertices.iter().zip(g2_vertices) {
        ec += d(g1.edge_label(u, a), g2.edge_label(v, b));
    }
    ec
}

/// `Γ(a - {x}, b - {y})`, where removing λ is a no-op.
fn gamma_without(a: &LabelMultiset, x: Label, b: &LabelMultiset, y: Label) -> u32 {
    let la = a.len() - (!x.is_lambda() && a.count(x) > 0) as u32;
    let lb = b.len() - (!y.is_lambda() && b.count(y) > 0) as u32;
    let mut inter = 0;
    for (l, c) in a.iter() {
        let ca = c - (l == x) as u32;
        let cb = b.count(l).saturating_sub((l == y) as u32);
        inter += ca.min(cb);
    }
    la.max(lb) - inter
}

struct Node {
    lb: u32,
    ec: u32,
    seq: u64,
    mapped: Vec<u32>,
    key: CacheKey,
}

impl Node {
    fn depth(&self) -> usize {
        self.mapped.len()
    }
}

// Max-heap order: smallest bound first, then deepest, then oldest.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lb
            .cmp(&self.lb)
            .then(self.mapped.len().cmp(&other.mapped.len()))
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

/// State of one threshold GED computation between two padded graphs.
pub struct SearchContext<'a> {
    g1: Graph,
    g2: Graph,
    /// Real vertices of `g1`; its blank copies follow.
    n1_real: usize,
    tau: u32,
    order: Vec<usize>,
    cache: BTreeMap<CacheKey, BoundCacheEntry>,
    opts: GedOptions<'a>,
    stats: GedStats,
    trace: Vec<CacheEvent>,
}

impl<'a> SearchContext<'a> {
    pub fn new(g1: &Graph, g2: &Graph, tau: u32, opts: GedOptions<'a>) -> Self {
        let n1_real = g1.order();
        let (p1, p2) = pad_graphs(g1, g2);
        let order = derive_vertex_order(&p2, g1);
        SearchContext {
            g1: p1,
            g2: p2,
            n1_real,
            tau,
            order,
            cache: BTreeMap::new(),
            opts,
            stats: GedStats::default(),
            trace: Vec::new(),
        }
    }

    /// Order in which `g2` vertices are mapped, one per tree level.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn padded(&self) -> (&Graph, &Graph) {
        (&self.g1, &self.g2)
    }

    pub fn stats(&self) -> &GedStats {
        &self.stats
    }

    pub fn cache_entry(&self, key: &CacheKey) -> Option<&BoundCacheEntry> {
        self.cache.get(key)
    }

    fn is_blank1(&self, u: usize) -> bool {
        u >= self.n1_real
    }

    /// Cache key of the mapping `g1_vertices[i] ↦ order[i]`.
    pub fn key_of(&self, g1_vertices: &[usize]) -> CacheKey {
        g1_vertices
            .iter()
            .fold(CacheKey::empty(self.n1_real), |k, &u| {
                k.with(u, self.is_blank1(u))
            })
    }

    /// Lower bound of the mapping `g1_vertices[i] ↦ order[i]`, computed from
    /// scratch and sharing this context's bound cache.
    pub fn lb_mapping(&mut self, g1_vertices: &[usize]) -> u32 {
        let g2_vertices = &self.order[..g1_vertices.len()];
        let ec = edit_cost(&self.g1, &self.g2, g1_vertices, g2_vertices);
        let state = UnmappedState::from_scratch(&self.g1, &self.g2, g1_vertices, g2_vertices);
        let key = self.key_of(g1_vertices);
        self.lower_bound(ec, state.bridge_cost(), key, |_, _, _| state.clone())
    }

    /// The bound of a mapping with edit cost `ec` and bridge cost `bridge`.
    /// `state` builds the unmapped-subgraph state from the padded graphs and
    /// the vertex order; it only runs when the cascade has to.
    fn lower_bound(
        &mut self,
        ec: u32,
        bridge: u32,
        key: CacheKey,
        state: impl FnOnce(&Graph, &Graph, &[usize]) -> UnmappedState,
    ) -> u32 {
        let tau = self.tau;
        let mut dist = ec;
        if dist > tau {
            return dist;
        }
        dist += bridge;
        if dist > tau {
            return dist;
        }
        let tracing = self.opts.trace_cache;
        let fresh = !self.cache.contains_key(&key);
        let entry = self.cache.entry(key.clone()).or_default();
        if dist + entry.lb > tau {
            self.stats.cache_prunes += 1;
            return dist + entry.lb;
        }
        let filters = self.opts.filters;
        let incomplete =
            |e: &BoundCacheEntry| e.partition.as_ref().is_some_and(|p| !p.is_complete());
        if entry.index == 3 && !(filters.partition && incomplete(entry)) {
            return dist + entry.lb;
        }
        let trace = &mut self.trace;
        let mut record = |e: &BoundCacheEntry| {
            if tracing {
                trace.push(CacheEvent {
                    key: key.clone(),
                    index: e.index,
                    lb: e.lb,
                });
            }
        };
        if fresh {
            record(entry);
        }

        let (g1, g2) = (&self.g1, &self.g2);
        let state = state(g1, g2, &self.order);
        let residual = || {
            let (r1, r2) = state.residual_vertices(g1, g2);
            (g1.induced(&r1), g2.induced(&r2))
        };
        let stats = &mut self.stats;
        let mut i = entry.index + 1;
        while i <= 3 {
            entry.index = i;
            let bound = match i {
                1 if filters.label => {
                    stats.cascade_calls[0] += 1;
                    Some(state.label_lb())
                }
                2 if filters.branch => {
                    stats.cascade_calls[1] += 1;
                    Some(state.branch_lb_halves().div_ceil(2))
                }
                3 if filters.partition => {
                    stats.cascade_calls[2] += 1;
                    let (h1, h2) = residual();
                    let ps = partition_graph(&h2, &h1, tau - dist, entry.partition.take());
                    let lb = partition_lb(&ps);
                    entry.partition = Some(ps);
                    Some(lb)
                }
                _ => None,
            };
            if let Some(b) = bound {
                if entry.lb < b {
                    entry.lb = b;
                    if dist + entry.lb > tau {
                        record(entry);
                        return dist + entry.lb;
                    }
                }
            }
            i += 1;
        }
        // A partitioning stopped under a tighter slack may find more failing
        // fragments with this mapping's slack.
        if filters.partition && incomplete(entry) && dist + entry.lb <= tau {
            stats.partition_resumes += 1;
            let (h1, h2) = residual();
            let ps = partition_graph(&h2, &h1, tau - dist, entry.partition.take());
            entry.lb = entry.lb.max(partition_lb(&ps));
            entry.partition = Some(ps);
        }
        record(entry);
        dist + entry.lb
    }

    /// Runs the best-first search to completion or preemption.
    pub fn run(mut self) -> GedOutcome {
        let tau = self.tau;
        let n = self.g2.order();
        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;

        let root_lb = {
            let state = UnmappedState::from_scratch(&self.g1, &self.g2, &[], &[]);
            let key = CacheKey::empty(self.n1_real);
            self.lower_bound(0, 0, key, |_, _, _| state)
        };
        if root_lb <= tau {
            heap.push(Node {
                lb: root_lb,
                ec: 0,
                seq,
                mapped: Vec::new(),
                key: CacheKey::empty(self.n1_real),
            });
            seq += 1;
            self.stats.nodes_pushed += 1;
        } else {
            self.stats.root_pruned = true;
        }
        if let Some(m) = self.opts.monitor {
            m.publish_queue_len(heap.len());
        }

        let mut result = (tau + 1, true);
        let mut g1_vertices: Vec<usize> = Vec::with_capacity(n);
        while let Some(top) = heap.peek() {
            if self.opts.monitor.is_some_and(|m| m.abort_requested()) {
                result = (top.lb, false);
                break;
            }
            let node = heap.pop().expect("peeked");
            self.stats.nodes_popped += 1;
            let depth = node.depth();
            if depth == n {
                result = (node.ec, true);
                break;
            }
            g1_vertices.clear();
            g1_vertices.extend(node.mapped.iter().map(|&u| u as usize));
            let g2_vertices: Vec<usize> = self.order[..depth].to_vec();
            let g2_vertices = &g2_vertices[..];
            let v = self.order[depth];
            let state = UnmappedState::from_scratch(&self.g1, &self.g2, &g1_vertices, g2_vertices);

            let next_blank = self.n1_real + node.key.n_eps as usize;
            let candidates = (0..self.n1_real)
                .filter(|&u| !node.key.contains(u))
                .chain((next_blank < n).then_some(next_blank));
            let candidates: SmallVec<[usize; 32]> = candidates.collect();
            for u in candidates {
                let ec =
                    extend_edit_cost(node.ec, &self.g1, &self.g2, &g1_vertices, g2_vertices, u, v);
                if ec > tau {
                    continue;
                }
                let bridge = self.child_bridge_cost(&state, &g1_vertices, g2_vertices, u, v);
                let key = node.key.with(u, self.is_blank1(u));
                let lb = {
                    let (gv, st) = (&g1_vertices, &state);
                    self.lower_bound(ec, bridge, key.clone(), |g1, g2, order| {
                        st.extend(g1, g2, gv, &order[..depth], u, v)
                    })
                };
                if lb <= tau {
                    let mut mapped = node.mapped.clone();
                    mapped.push(u as u32);
                    heap.push(Node {
                        lb,
                        ec,
                        seq,
                        mapped,
                        key,
                    });
                    seq += 1;
                    self.stats.nodes_pushed += 1;
                }
            }
            self.stats.peak_queue = self.stats.peak_queue.max(heap.len());
            if let Some(m) = self.opts.monitor {
                m.publish_queue_len(heap.len());
            }
        }
        if let Some(m) = self.opts.monitor {
            m.publish_queue_len(0);
        }
        self.stats.cache_entries = self.cache.len();
        GedOutcome {
            distance: result.0,
            exact: result.1,
            stats: self.stats,
            cache_trace: self.trace,
        }
    }

    /// Bridge cost of the child adding `u ↦ v`, from the parent's state.
    fn child_bridge_cost(
        &self,
        parent: &UnmappedState,
        g1_vertices: &[usize],
        g2_vertices: &[usize],
        u: usize,
        v: usize,
    ) -> u32 {
        let (g1, g2) = (&self.g1, &self.g2);
        let mut cost = 0;
        for (i, (&a, &b)) in g1_vertices.iter().zip(g2_vertices).enumerate() {
            cost += gamma_without(
                &parent.g1.bridges[i],
                g1.edge_label(a, u),
                &parent.g2.bridges[i],
                g2.edge_label(b, v),
            );
        }
        let fresh = |g: &Graph, side: &SideState, x: usize| -> LabelMultiset {
            g.neighbors(x)
                .iter()
                .filter(|&&w| w != x && side.unmapped[w])
                .map(|&w| g.edge_label(x, w))
                .collect()
        };
        cost + gamma(&fresh(g1, &parent.g1, u), &fresh(g2, &parent.g2, v))
    }
}

/// Threshold GED with every filter enabled: `ged(g1, g2)` if it is at most
/// `tau`, otherwise `tau + 1`.
pub fn nass_ged(g1: &Graph, g2: &Graph, tau: u32) -> u32 {
    nass_ged_with(g1, g2, tau, &GedOptions::default()).distance
}

pub fn nass_ged_with(g1: &Graph, g2: &Graph, tau: u32, opts: &GedOptions<'_>) -> GedOutcome {
    SearchContext::new(g1, g2, tau, *opts).run()
}

#[cfg(test)]
mod tests;
