//! Labeled undirected simple graphs, label interning and label multisets.

mod io;
mod multiset;
mod synth;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use io::{parse_db, parse_graphs, write_db, write_graphs, ParseError};
pub use multiset::{gamma, LabelMultiset};
pub use synth::{gen_synthetic, mutate, random_graph, SynthError, SyntheticConfig};

/// An interned vertex or edge label.
///
/// [`Label::LAMBDA`] marks an absent edge or a blank vertex. It is never
/// produced by an [`Interner`] and never counted in a [`LabelMultiset`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub u32);

impl Label {
    pub const LAMBDA: Label = Label(u32::MAX);

    #[inline]
    pub fn is_lambda(self) -> bool {
        self == Self::LAMBDA
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_lambda() {
            f.write_str("λ")
        } else {
            write!(f, "L{}", self.0)
        }
    }
}

/// Bijection between label tokens and dense ids, in first-seen order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Interner {
    ids: HashMap<String, Label>,
    tokens: Vec<String>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, token: &str) -> Label {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = Label(self.tokens.len() as u32);
        self.tokens.push(token.to_owned());
        self.ids.insert(token.to_owned(), id);
        id
    }

    pub fn get(&self, token: &str) -> Option<Label> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, label: Label) -> Option<&str> {
        self.tokens.get(label.0 as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Separate vertex and edge label tables shared by one database and the
/// queries parsed against it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelTables {
    pub vertex: Interner,
    pub edge: Interner,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0}, {1}) references a vertex outside 0..{2}")]
    VertexOutOfRange(usize, usize, usize),
    #[error("edge ({0}, {1}) carries the blank label or touches a blank vertex")]
    BlankEdge(usize, usize),
}

/// A labeled undirected simple graph.
///
/// Edge labels live in a dense `n × n` matrix so that `edge_label` is a single
/// load; the graphs this crate targets have tens of vertices.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    id: usize,
    labels: Vec<Label>,
    adj: Vec<Label>,
    neighbors: Vec<Vec<usize>>,
    n_edges: usize,
}

impl Graph {
    /// Builds a graph from vertex labels and an undirected edge list.
    pub fn from_parts(
        id: usize,
        labels: Vec<Label>,
        edges: &[(usize, usize, Label)],
    ) -> Result<Self, GraphError> {
        let n = labels.len();
        let mut g = Graph {
            id,
            adj: vec![Label::LAMBDA; n * n],
            neighbors: vec![Vec::new(); n],
            labels,
            n_edges: 0,
        };
        for &(u, v, l) in edges {
            g.insert_edge(u, v, l)?;
        }
        for list in &mut g.neighbors {
            list.sort_unstable();
        }
        Ok(g)
    }

    /// Graph with `n` blank vertices and no edges.
    pub fn blank(id: usize, n: usize) -> Self {
        Graph::from_parts(id, vec![Label::LAMBDA; n], &[]).expect("no edges")
    }

    fn insert_edge(&mut self, u: usize, v: usize, l: Label) -> Result<(), GraphError> {
        let n = self.labels.len();
        if u >= n || v >= n {
            return Err(GraphError::VertexOutOfRange(u, v, n));
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if l.is_lambda() || self.labels[u].is_lambda() || self.labels[v].is_lambda() {
            return Err(GraphError::BlankEdge(u, v));
        }
        if !self.adj[u * n + v].is_lambda() {
            return Err(GraphError::DuplicateEdge(u, v));
        }
        self.adj[u * n + v] = l;
        self.adj[v * n + u] = l;
        self.neighbors[u].push(v);
        self.neighbors[v].push(u);
        self.n_edges += 1;
        Ok(())
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn with_id(mut self, id: usize) -> Self {
        self.id = id;
        self
    }

    /// Vertex count, blank vertices included.
    #[inline]
    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.n_edges
    }

    /// Label of `v`, or λ for a blank vertex or an index past the end.
    #[inline]
    pub fn vertex_label(&self, v: usize) -> Label {
        self.labels.get(v).copied().unwrap_or(Label::LAMBDA)
    }

    pub fn vertex_labels(&self) -> &[Label] {
        &self.labels
    }

    /// Label of the edge `(u, v)`, or λ when there is none.
    #[inline]
    pub fn edge_label(&self, u: usize, v: usize) -> Label {
        let n = self.labels.len();
        if u < n && v < n {
            self.adj[u * n + v]
        } else {
            Label::LAMBDA
        }
    }

    pub fn is_blank(&self, v: usize) -> bool {
        self.vertex_label(v).is_lambda()
    }

    /// Number of non-blank vertices.
    pub fn real_order(&self) -> usize {
        self.labels.iter().filter(|l| !l.is_lambda()).count()
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Edges as `(u, v, label)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Label)> + '_ {
        self.neighbors.iter().enumerate().flat_map(move |(u, ns)| {
            ns.iter()
                .filter(move |&&v| v > u)
                .map(move |&v| (u, v, self.edge_label(u, v)))
        })
    }

    pub fn vertex_multiset(&self) -> LabelMultiset {
        LabelMultiset::from_labels(self.labels.iter().copied())
    }

    pub fn edge_multiset(&self) -> LabelMultiset {
        LabelMultiset::from_labels(self.edges().map(|(_, _, l)| l))
    }

    /// Same graph followed by `n - order()` blank vertices.
    pub fn padded_to(&self, n: usize) -> Graph {
        if n <= self.order() {
            return self.clone();
        }
        let mut labels = self.labels.clone();
        labels.resize(n, Label::LAMBDA);
        let edges: Vec<_> = self.edges().collect();
        Graph::from_parts(self.id, labels, &edges).expect("edges of a valid graph")
    }

    /// Induced subgraph on `vertices`; vertex `i` of the result is
    /// `vertices[i]` of `self`.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let labels = vertices.iter().map(|&v| self.vertex_label(v)).collect();
        let mut edges = Vec::new();
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
                let l = self.edge_label(u, v);
                if !l.is_lambda() {
                    edges.push((i, j, l));
                }
            }
        }
        Graph::from_parts(self.id, labels, &edges).expect("induced subgraph of a valid graph")
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("id", &self.id)
            .field("labels", &self.labels)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

/// An ordered collection of graphs with dense ids `0..len()` and the label
/// tables they were interned with.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphDatabase {
    pub graphs: Vec<Graph>,
    pub labels: LabelTables,
}

impl GraphDatabase {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&Graph> {
        self.graphs.get(id)
    }
}

/// Label-multiset lower bound on `ged(r, s)`.
pub fn lb_label(r: &Graph, s: &Graph) -> u32 {
    gamma(&r.vertex_multiset(), &s.vertex_multiset())
        + gamma(&r.edge_multiset(), &s.edge_multiset())
}
