//! Exhaustive GED for small graphs, used as a test and verification oracle.
//!
//! Enumerates every bijection between the padded vertex sets and takes the
//! cheapest, with the cost of a bijection counted directly: one per vertex
//! pair with different labels plus one per vertex-pair pair whose edge labels
//! differ (λ for no edge). Shares nothing with the search engine.

use thiserror::Error;

use crate::graph::Graph;

/// Largest padded order the oracle accepts (9! bijections).
pub const BRUTE_FORCE_MAX_VERTICES: usize = 9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("graphs too large for exhaustive GED: {0} vertices after padding (max {BRUTE_FORCE_MAX_VERTICES})")]
    TooLarge(usize),
}

/// Exact GED by enumerating all padded vertex bijections.
pub fn brute_force_ged(g1: &Graph, g2: &Graph) -> Result<u32, OracleError> {
    let n = g1.order().max(g2.order());
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(OracleError::TooLarge(n));
    }
    // Out-of-range indices read as blank vertices, which is the padding.
    let mut image = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut best = u32::MAX;
    enumerate(g1, g2, n, &mut image, &mut used, 0, &mut best);
    Ok(best)
}

fn enumerate(
    g1: &Graph,
    g2: &Graph,
    n: usize,
    image: &mut Vec<usize>,
    used: &mut [bool],
    cost: u32,
    best: &mut u32,
) {
    let v = image.len();
    if v == n {
        *best = (*best).min(cost);
        return;
    }
    for u in 0..n {
        if used[u] {
            continue;
        }
        let mut c = cost + (g1.vertex_label(u) != g2.vertex_label(v)) as u32;
        for (w, &x) in image.iter().enumerate() {
            c += (g1.edge_label(u, x) != g2.edge_label(v, w)) as u32;
        }
        used[u] = true;
        image.push(u);
        enumerate(g1, g2, n, image, used, c, best);
        image.pop();
        used[u] = false;
    }
}

/// Cost of one full bijection given as `perm[v] = u` (g2 vertex `v` receives
/// g1 vertex `u`), both indexed over `0..n` with blanks past each order.
pub fn mapping_cost(g1: &Graph, g2: &Graph, perm: &[usize]) -> u32 {
    let mut c = 0;
    for (v, &u) in perm.iter().enumerate() {
        c += (g1.vertex_label(u) != g2.vertex_label(v)) as u32;
        for (w, &x) in perm.iter().enumerate().skip(v + 1) {
            c += (g1.edge_label(u, x) != g2.edge_label(v, w)) as u32;
        }
    }
    c
}
