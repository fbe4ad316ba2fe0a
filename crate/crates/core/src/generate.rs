//! Graph generators. All are deterministic given their arguments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GraphError;
use crate::graph::DiGraph;

/// Complete digraph `K_n`: every ordered pair of distinct nodes.
pub fn complete(n: usize) -> Result<DiGraph, GraphError> {
    DiGraph::from_edges(
        n,
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))),
    )
}

/// Directed ring `0 -> 1 -> .. -> n-1 -> 0`.
pub fn ring(n: usize) -> Result<DiGraph, GraphError> {
    if n == 2 {
        return DiGraph::from_edges(2, [(0, 1), (1, 0)]);
    }
    DiGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// `G(n, p)`: each ordered pair `(i, j)`, `i != j`, is an edge independently
/// with probability `p`. Pairs are drawn in `(i, j)` lexicographic order from a
/// ChaCha8 stream seeded with `seed`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<DiGraph, InvalidProbability> {
    if !(0.0..=1.0).contains(&p) {
        return Err(InvalidProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = alloc::vec::Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    DiGraph::from_edges(n, edges).map_err(|_| InvalidProbability(p))
}

/// Edge probability outside `[0, 1]` (or `n < 2`).
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("invalid Erdős–Rényi parameters (p = {0}, need p in [0, 1] and n >= 2)")]
pub struct InvalidProbability(pub f64);
