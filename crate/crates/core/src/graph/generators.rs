use super::FeedbackGraph;
use crate::error::{Error, Result};
use crate::rng::Stream;

/// Star on `n` vertices: vertex `n - 1` observes every other vertex.
pub fn gen_star(n: usize) -> Result<FeedbackGraph> {
    if n == 0 {
        return Err(Error::Construction("star needs at least one vertex".into()));
    }
    let hub = n - 1;
    FeedbackGraph::build(n, (0..hub).map(|i| (hub, i)))
}

pub fn gen_edgeless(n: usize) -> Result<FeedbackGraph> {
    FeedbackGraph::build(n, [])
}

/// Disjoint union of stars. Each `(leaves, copies)` entry appends `copies`
/// stars with `leaves` leaves each; inside a block the leaves come first and
/// the hub last.
pub fn gen_union_of_stars(sizes: &[(usize, usize)]) -> Result<FeedbackGraph> {
    if sizes.is_empty() || sizes.iter().any(|&(_, m)| m == 0) {
        return Err(Error::Construction(
            "union of stars needs at least one star and positive multiplicities".into(),
        ));
    }
    let mut edges = Vec::new();
    let mut next = 0usize;
    for &(leaves, copies) in sizes {
        for _ in 0..copies {
            let hub = next + leaves;
            edges.extend((next..hub).map(|leaf| (hub, leaf)));
            next = hub + 1;
        }
    }
    FeedbackGraph::build(next, edges)
}

/// Directed Erdős–Rényi graph: each ordered pair `i != j` carries an edge
/// independently with probability `p`. Deterministic in `seed`.
pub fn gen_random(n: usize, p: f64, seed: u64) -> Result<FeedbackGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("edge probability {p} not in [0, 1]")));
    }
    let stream = Stream::new(seed).split(0x67_7261_7068);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && stream.uniform_at((i * n + j) as u64) < p {
                edges.push((i, j));
            }
        }
    }
    FeedbackGraph::build(n, edges)
}
