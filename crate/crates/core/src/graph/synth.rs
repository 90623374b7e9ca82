//! Synthetic corpus generation: random base graphs sized by edge count and
//! density, each followed by clones perturbed with random edit operations.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Graph, GraphDatabase, Label, LabelTables};

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    /// Number of base graphs.
    pub count: usize,
    /// Mean edge count of a base graph.
    pub avg_edges: usize,
    /// `2|E| / (|V|(|V|-1))`.
    pub density: f64,
    pub n_vertex_labels: usize,
    pub n_edge_labels: usize,
    pub mutations_per_clone: usize,
    /// Mutated copies emitted after each base graph.
    pub clones: usize,
    pub rng_seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            count: 10,
            avg_edges: 12,
            density: 0.25,
            n_vertex_labels: 4,
            n_edge_labels: 2,
            mutations_per_clone: 2,
            clones: 4,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("density must be in (0, 1], got {0}")]
    Density(f64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

impl SyntheticConfig {
    fn validate(&self) -> Result<(), SynthError> {
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(SynthError::Density(self.density));
        }
        if self.count == 0 {
            return Err(SynthError::NonPositive("count"));
        }
        if self.n_vertex_labels == 0 {
            return Err(SynthError::NonPositive("vertex label count"));
        }
        if self.n_edge_labels == 0 {
            return Err(SynthError::NonPositive("edge label count"));
        }
        Ok(())
    }
}

/// Vertex count for `edges` edges at `density`, rounded to the nearest
/// integer and raised until the edges fit in a simple graph.
fn vertex_count(edges: usize, density: f64) -> usize {
    let exact = (1.0 + (1.0 + 8.0 * edges as f64 / density).sqrt()) / 2.0;
    let mut n = (exact.round() as usize).max(1);
    while n * (n - 1) / 2 < edges {
        n += 1;
    }
    n
}

fn random_label(rng: &mut ChaCha8Rng, n: usize) -> Label {
    Label(rng.gen_range(0..n) as u32)
}

fn base_graph(cfg: &SyntheticConfig, rng: &mut ChaCha8Rng) -> Graph {
    let lo = (cfg.avg_edges / 2).max(if cfg.avg_edges > 0 { 1 } else { 0 });
    let hi = cfg.avg_edges + (cfg.avg_edges - lo);
    let m = rng.gen_range(lo..=hi);
    let n = vertex_count(m, cfg.density);
    let labels: Vec<Label> = (0..n)
        .map(|_| random_label(rng, cfg.n_vertex_labels))
        .collect();

    let mut present = vec![false; n * n];
    let mut edges = Vec::with_capacity(m);
    // Random spanning tree first when there are enough edges for one.
    if m + 1 >= n {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        for i in 1..n {
            let (u, v) = (perm[rng.gen_range(0..i)], perm[i]);
            present[u * n + v] = true;
            present[v * n + u] = true;
            edges.push((u, v, random_label(rng, cfg.n_edge_labels)));
        }
    }
    let mut free: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !present[u * n + v])
        .collect();
    free.shuffle(rng);
    for (u, v) in free.into_iter().take(m - edges.len()) {
        edges.push((u, v, random_label(rng, cfg.n_edge_labels)));
    }
    Graph::from_parts(0, labels, &edges).expect("generator emits simple graphs")
}

/// Erdős–Rényi style graph: `n` vertices, each pair joined with probability
/// `edge_prob`, labels drawn uniformly.
pub fn random_graph(
    rng: &mut impl Rng,
    n: usize,
    edge_prob: f64,
    n_vertex_labels: usize,
    n_edge_labels: usize,
) -> Graph {
    let labels = (0..n)
        .map(|_| Label(rng.gen_range(0..n_vertex_labels) as u32))
        .collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(edge_prob) {
                edges.push((u, v, Label(rng.gen_range(0..n_edge_labels) as u32)));
            }
        }
    }
    Graph::from_parts(0, labels, &edges).expect("simple by construction")
}

/// Applies `ops` random edit operations to `g`, drawing uniformly among the
/// six operation kinds and redrawing when the drawn kind cannot apply.
pub fn mutate(
    g: &Graph,
    ops: usize,
    n_vertex_labels: usize,
    n_edge_labels: usize,
    rng: &mut impl Rng,
) -> Graph {
    let mut labels: Vec<Label> = g.vertex_labels().to_vec();
    let mut edges: Vec<(usize, usize, Label)> = g.edges().collect();

    let mut applied = 0;
    while applied < ops {
        let n = labels.len();
        let ok = match rng.gen_range(0..6) {
            // insert an isolated vertex
            0 => {
                labels.push(Label(rng.gen_range(0..n_vertex_labels) as u32));
                true
            }
            // delete an isolated vertex
            1 => {
                let mut deg = vec![0usize; n];
                for &(u, v, _) in &edges {
                    deg[u] += 1;
                    deg[v] += 1;
                }
                let isolated: Vec<usize> = (0..n).filter(|&v| deg[v] == 0).collect();
                if isolated.is_empty() {
                    false
                } else {
                    let x = isolated[rng.gen_range(0..isolated.len())];
                    labels.remove(x);
                    for e in &mut edges {
                        if e.0 > x {
                            e.0 -= 1;
                        }
                        if e.1 > x {
                            e.1 -= 1;
                        }
                    }
                    true
                }
            }
            // relabel a vertex
            2 => {
                if n == 0 || n_vertex_labels < 2 {
                    false
                } else {
                    let v = rng.gen_range(0..n);
                    let shift = rng.gen_range(1..n_vertex_labels) as u32;
                    labels[v] = Label((labels[v].0 + shift) % n_vertex_labels as u32);
                    true
                }
            }
            // insert an edge
            3 => {
                let free: Vec<(usize, usize)> = (0..n)
                    .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                    .filter(|&(u, v)| {
                        !edges
                            .iter()
                            .any(|&(a, b, _)| (a, b) == (u, v) || (a, b) == (v, u))
                    })
                    .collect();
                if free.is_empty() {
                    false
                } else {
                    let (u, v) = free[rng.gen_range(0..free.len())];
                    edges.push((u, v, Label(rng.gen_range(0..n_edge_labels) as u32)));
                    true
                }
            }
            // delete an edge
            4 => {
                if edges.is_empty() {
                    false
                } else {
                    let i = rng.gen_range(0..edges.len());
                    edges.remove(i);
                    true
                }
            }
            // relabel an edge
            _ => {
                if edges.is_empty() || n_edge_labels < 2 {
                    false
                } else {
                    let i = rng.gen_range(0..edges.len());
                    let shift = rng.gen_range(1..n_edge_labels) as u32;
                    edges[i].2 = Label((edges[i].2 .0 + shift) % n_edge_labels as u32);
                    true
                }
            }
        };
        if ok {
            applied += 1;
        }
    }
    Graph::from_parts(g.id(), labels, &edges).expect("mutations preserve simplicity")
}

/// Generates `count * (1 + clones)` graphs: each base graph followed by its
/// clones. Deterministic in `rng_seed`.
pub fn gen_synthetic(cfg: &SyntheticConfig) -> Result<GraphDatabase, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut labels = LabelTables::default();
    for i in 0..cfg.n_vertex_labels {
        labels.vertex.intern(&format!("V{i}"));
    }
    for i in 0..cfg.n_edge_labels {
        labels.edge.intern(&format!("e{i}"));
    }

    let mut graphs = Vec::with_capacity(cfg.count * (1 + cfg.clones));
    for _ in 0..cfg.count {
        let base = base_graph(cfg, &mut rng);
        for _ in 0..cfg.clones {
            let clone = mutate(
                &base,
                cfg.mutations_per_clone,
                cfg.n_vertex_labels,
                cfg.n_edge_labels,
                &mut rng,
            );
            graphs.push(clone);
        }
        graphs.insert(graphs.len() - cfg.clones, base);
    }
    let graphs = graphs
        .into_iter()
        .enumerate()
        .map(|(i, g)| g.with_id(i))
        .collect();
    Ok(GraphDatabase { graphs, labels })
}
