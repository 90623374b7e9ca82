//! Multisets describing the unmapped subgraphs and bridges of a partial
//! mapping, built from scratch or updated one mapped pair at a time.

use crate::graph::{gamma, Graph, Label, LabelMultiset};

/// A vertex label with the sorted labels of its edges inside the unmapped
/// subgraph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Branch {
    pub label: Label,
    pub edges: Vec<Label>,
}

impl Branch {
    fn without_edge(&self, l: Label) -> Branch {
        let mut edges = self.edges.clone();
        let i = edges
            .binary_search(&l)
            .expect("edge label present in branch");
        edges.remove(i);
        Branch {
            label: self.label,
            edges,
        }
    }
}

/// One graph's view of a partial mapping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SideState {
    /// `unmapped[v]` for every (padded) vertex.
    pub unmapped: Vec<bool>,
    pub vertex_labels: LabelMultiset,
    pub edge_labels: LabelMultiset,
    /// Branches of the unmapped real vertices, sorted.
    pub branches: Vec<Branch>,
    /// Bridge label multiset of each mapped vertex, in mapping order.
    pub bridges: Vec<LabelMultiset>,
}

impl SideState {
    fn from_scratch(g: &Graph, mapped: &[usize]) -> Self {
        let mut unmapped = vec![true; g.order()];
        for &v in mapped {
            unmapped[v] = false;
        }
        let rest: Vec<usize> = (0..g.order()).filter(|&v| unmapped[v]).collect();
        let vertex_labels = rest.iter().map(|&v| g.vertex_label(v)).collect();
        let mask = &unmapped;
        let edge_labels = rest
            .iter()
            .flat_map(|&u| {
                g.neighbors(u)
                    .iter()
                    .filter(move |&&w| w > u && mask[w])
                    .map(move |&w| g.edge_label(u, w))
            })
            .collect();
        let mut branches: Vec<Branch> = rest
            .iter()
            .filter(|&&v| !g.is_blank(v))
            .map(|&v| branch_of(g, v, &unmapped))
            .collect();
        branches.sort_unstable();
        let bridges = mapped
            .iter()
            .map(|&v| bridge_labels(g, v, &unmapped))
            .collect();
        SideState {
            unmapped,
            vertex_labels,
            edge_labels,
            branches,
            bridges,
        }
    }

    /// Moves `x` from the unmapped subgraph to the mapped one.
    fn map_vertex(&mut self, g: &Graph, mapped: &[usize], x: usize) {
        debug_assert!(self.unmapped[x]);
        if g.is_blank(x) {
            // ε has no label and no edges.
            self.unmapped[x] = false;
            self.bridges.push(LabelMultiset::new());
            return;
        }
        let own = branch_of(g, x, &self.unmapped);
        let i = self
            .branches
            .binary_search(&own)
            .expect("branch of mapped vertex");
        self.branches.remove(i);
        for &w in g.neighbors(x) {
            if !self.unmapped[w] {
                continue;
            }
            let l = g.edge_label(x, w);
            self.edge_labels.remove(l);
            // x is still unmapped here, so this is w's stored branch.
            let old = branch_of(g, w, &self.unmapped);
            let i = self
                .branches
                .binary_search(&old)
                .expect("branch of neighbor");
            self.branches.remove(i);
            let new = old.without_edge(l);
            let j = self.branches.binary_search(&new).unwrap_or_else(|j| j);
            self.branches.insert(j, new);
        }
        self.unmapped[x] = false;
        self.vertex_labels.remove(g.vertex_label(x));
        for (i, &m) in mapped.iter().enumerate() {
            let l = g.edge_label(m, x);
            if !l.is_lambda() {
                self.bridges[i].remove(l);
            }
        }
        self.bridges.push(bridge_labels(g, x, &self.unmapped));
    }
}

fn branch_of(g: &Graph, v: usize, unmapped: &[bool]) -> Branch {
    let mut edges: Vec<Label> = g
        .neighbors(v)
        .iter()
        .filter(|&&w| unmapped[w])
        .map(|&w| g.edge_label(v, w))
        .collect();
    edges.sort_unstable();
    Branch {
        label: g.vertex_label(v),
        edges,
    }
}

fn bridge_labels(g: &Graph, v: usize, unmapped: &[bool]) -> LabelMultiset {
    g.neighbors(v)
        .iter()
        .filter(|&&w| unmapped[w])
        .map(|&w| g.edge_label(v, w))
        .collect()
}

/// Unmapped-subgraph and bridge multisets of both graphs for one partial
/// mapping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnmappedState {
    pub g1: SideState,
    pub g2: SideState,
}

impl UnmappedState {
    /// Builds the state for the mapping `g1_vertices[i] ↦ g2_vertices[i]`.
    pub fn from_scratch(
        g1: &Graph,
        g2: &Graph,
        g1_vertices: &[usize],
        g2_vertices: &[usize],
    ) -> Self {
        debug_assert_eq!(g1_vertices.len(), g2_vertices.len());
        UnmappedState {
            g1: SideState::from_scratch(g1, g1_vertices),
            g2: SideState::from_scratch(g2, g2_vertices),
        }
    }

    /// State of the child mapping that adds `u ↦ v`. The slices describe the
    /// parent mapping.
    pub fn extend(
        &self,
        g1: &Graph,
        g2: &Graph,
        g1_vertices: &[usize],
        g2_vertices: &[usize],
        u: usize,
        v: usize,
    ) -> Self {
        let mut next = self.clone();
        next.g1.map_vertex(g1, g1_vertices, u);
        next.g2.map_vertex(g2, g2_vertices, v);
        next
    }

    /// Bridge cost: `Σ Γ(L_br(u), L_br(v))` over mapped pairs.
    pub fn bridge_cost(&self) -> u32 {
        self.g1
            .bridges
            .iter()
            .zip(&self.g2.bridges)
            .map(|(a, b)| gamma(a, b))
            .sum()
    }

    /// Label-multiset bound between the unmapped subgraphs.
    pub fn label_lb(&self) -> u32 {
        gamma(&self.g1.vertex_labels, &self.g2.vertex_labels)
            + gamma(&self.g1.edge_labels, &self.g2.edge_labels)
    }

    /// Compact branch bound between the unmapped subgraphs, in half units.
    pub fn branch_lb_halves(&self) -> u32 {
        compact_branch_lb_halves(&self.g1.branches, &self.g2.branches)
    }

    /// Real unmapped vertices of each graph, ascending.
    pub fn residual_vertices(&self, g1: &Graph, g2: &Graph) -> (Vec<usize>, Vec<usize>) {
        let pick = |g: &Graph, s: &SideState| -> Vec<usize> {
            (0..g.order())
                .filter(|&v| s.unmapped[v] && !g.is_blank(v))
                .collect()
        };
        (pick(g1, &self.g1), pick(g2, &self.g2))
    }
}

/// Minimum-cost assignment between two sorted branch multisets under the
/// compact branch distance (0 identical, ½ same vertex label, 1 otherwise),
/// with blank branches padding the smaller side. Returned in half units.
///
/// The optimum pairs every identical branch and then every remaining pair
/// sharing a vertex label, so it reduces to two multiset intersections:
/// `2n - |same label| - |identical|`.
pub fn compact_branch_lb_halves(a: &[Branch], b: &[Branch]) -> u32 {
    let n = a.len().max(b.len()) as u32;
    let (mut same_label, mut identical) = (0u32, 0u32);
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let label = a[i].label;
        match label.cmp(&b[j].label) {
            std::cmp::Ordering::Less => {
                i += 1;
                continue;
            }
            std::cmp::Ordering::Greater => {
                j += 1;
                continue;
            }
            std::cmp::Ordering::Equal => {}
        }
        let ie = i + a[i..].iter().take_while(|x| x.label == label).count();
        let je = j + b[j..].iter().take_while(|x| x.label == label).count();
        same_label += ((ie - i).min(je - j)) as u32;
        // Within the label group both runs are sorted by edge multiset.
        let (mut p, mut q) = (i, j);
        while p < ie && q < je {
            match a[p].edges.cmp(&b[q].edges) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    identical += 1;
                    p += 1;
                    q += 1;
                }
            }
        }
        i = ie;
        j = je;
    }
    2 * n - same_label - identical
}
