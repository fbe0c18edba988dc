use std::collections::HashMap;

use super::FeedbackGraph;
use crate::error::{Error, Result};

/// Default limit on `n` for [`exact_independence_number`].
pub const EXACT_INDEPENDENCE_GUARD: usize = 24;

/// Undirected skeleton as bitmasks: bit `j` of `adj[i]` is set when an edge
/// runs between `i` and `j` in either direction. Self-loops are dropped.
fn skeleton_masks(g: &FeedbackGraph) -> Vec<u64> {
    let n = g.n();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && (g.has_edge(i, j) || g.has_edge(j, i)))
                .fold(0u64, |m, j| m | (1 << j))
        })
        .collect()
}

/// `α(G)`: the largest set with no edge in either direction between two
/// distinct members.
pub fn exact_independence_number(g: &FeedbackGraph) -> Result<usize> {
    exact_independence_number_with_guard(g, EXACT_INDEPENDENCE_GUARD)
}

pub fn exact_independence_number_with_guard(g: &FeedbackGraph, guard: usize) -> Result<usize> {
    let limit = guard.min(64);
    if g.n() > limit {
        return Err(Error::SizeGuard {
            size: g.n(),
            limit,
        });
    }
    let adj = skeleton_masks(g);
    let all = if g.n() == 64 { u64::MAX } else { (1u64 << g.n()) - 1 };
    let mut memo = HashMap::new();
    Ok(mis(all, &adj, &mut memo))
}

fn mis(set: u64, adj: &[u64], memo: &mut HashMap<u64, usize>) -> usize {
    if set == 0 {
        return 0;
    }
    if let Some(&v) = memo.get(&set) {
        return v;
    }
    let mut min_v = 0;
    let mut min_d = u32::MAX;
    let mut max_v = 0;
    let mut max_d = 0;
    let mut rest = set;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let d = (adj[v] & set).count_ones();
        if d < min_d {
            min_d = d;
            min_v = v;
        }
        if d > max_d {
            max_d = d;
            max_v = v;
        }
    }
    let best = if min_d <= 1 {
        // Some maximum independent set contains a vertex of degree <= 1.
        1 + mis(set & !(adj[min_v] | 1 << min_v), adj, memo)
    } else {
        let without = mis(set & !(1 << max_v), adj, memo);
        let with = 1 + mis(set & !(adj[max_v] | 1 << max_v), adj, memo);
        without.max(with)
    };
    memo.insert(set, best);
    best
}

/// Maximal independent set built by repeatedly taking a minimum-degree
/// vertex of the remaining skeleton (smallest index on ties). Its size is a
/// lower bound on `α`, usable when the exact solver is out of reach.
pub fn greedy_independent_set(g: &FeedbackGraph) -> Vec<usize> {
    let n = g.n();
    let neighbors = |i: usize, j: usize| i != j && (g.has_edge(i, j) || g.has_edge(j, i));
    let mut alive = vec![true; n];
    let mut chosen = Vec::new();
    loop {
        let pick = (0..n)
            .filter(|&i| alive[i])
            .min_by_key(|&i| (0..n).filter(|&j| alive[j] && neighbors(i, j)).count());
        let Some(v) = pick else { break };
        chosen.push(v);
        for (j, a) in alive.iter_mut().enumerate() {
            if j == v || neighbors(v, j) {
                *a = false;
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_random, gen_star, gen_union_of_stars};

    fn brute_force(g: &FeedbackGraph) -> usize {
        let n = g.n();
        (0u32..(1 << n))
            .filter(|&mask| {
                (0..n).all(|i| {
                    (0..n).all(|j| {
                        i == j
                            || mask >> i & 1 == 0
                            || mask >> j & 1 == 0
                            || (!g.has_edge(i, j) && !g.has_edge(j, i))
                    })
                })
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn complete_graph_has_alpha_one() {
        let g = FeedbackGraph::build(5, (0..5).flat_map(|i| (0..5).map(move |j| (i, j)))).unwrap();
        assert_eq!(exact_independence_number(&g).unwrap(), 1);
    }

    #[test]
    fn anti_parallel_edges_count_once() {
        let one_way = FeedbackGraph::build(2, [(0, 1)]).unwrap();
        let both = FeedbackGraph::build(2, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(exact_independence_number(&one_way).unwrap(), 1);
        assert_eq!(exact_independence_number(&both).unwrap(), 1);
    }

    #[test]
    fn matches_exhaustive_check_on_random_graphs() {
        for seed in 0..30 {
            let g = gen_random(10, 0.15 + 0.02 * (seed % 10) as f64, seed).unwrap();
            assert_eq!(exact_independence_number(&g).unwrap(), brute_force(&g), "seed {seed}");
        }
    }

    #[test]
    fn guard_is_enforced() {
        let g = gen_star(25).unwrap();
        assert!(matches!(
            exact_independence_number(&g),
            Err(Error::SizeGuard { size: 25, limit: 24 })
        ));
        assert_eq!(exact_independence_number_with_guard(&g, 30).unwrap(), 24);
    }

    #[test]
    fn greedy_is_independent_and_tight_on_stars() {
        let g = gen_union_of_stars(&[(3, 2), (1, 1)]).unwrap();
        let s = greedy_independent_set(&g);
        for &i in &s {
            for &j in &s {
                assert!(i == j || (!g.has_edge(i, j) && !g.has_edge(j, i)));
            }
        }
        assert_eq!(s.len(), exact_independence_number(&g).unwrap());
        assert_eq!(greedy_independent_set(&gen_star(300).unwrap()).len(), 299);
    }
}
