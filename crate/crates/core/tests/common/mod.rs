//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use graphbandit::graph::{FeedbackGraph, VertexSet};
use graphbandit::lp::LinearProgram;
use graphbandit::rng::StreamRng;
use nalgebra::{DMatrix, DVector};

/// Optimum of `lp` by enumerating every basic solution: choose `n` of the
/// `m + 1 + n` inequalities as equalities, solve, keep the feasible ones.
/// `None` when no vertex is feasible.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars;
    // Every constraint as g·x >= h.
    let mut rows: Vec<(Vec<f64>, f64)> = lp.ge_constraints.clone();
    rows.push((vec![-1.0; n], -lp.simplex_cap));
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        rows.push((e, 0.0));
    }
    let mut best: Option<f64> = None;
    for combo in combinations(rows.len(), n) {
        let a = DMatrix::from_fn(n, n, |r, c| rows[combo[r]].0[c]);
        let b = DVector::from_fn(n, |r, _| rows[combo[r]].1);
        let Some(x) = a.lu().solve(&b) else { continue };
        let feasible = rows.iter().all(|(g, h)| {
            let lhs: f64 = g.iter().zip(x.iter()).map(|(u, v)| u * v).sum();
            lhs >= h - 1e-9 * (1.0 + h.abs())
        });
        if feasible && x.iter().all(|v| v.is_finite()) {
            let obj: f64 = lp.objective.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
            best = Some(best.map_or(obj, |b: f64| b.min(obj)));
        }
    }
    best
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

/// Smallest `D ⊆ A` dominating `B`, by checking subsets in order of size.
pub fn brute_force_domination(g: &FeedbackGraph, a: &VertexSet, b: &VertexSet) -> Option<usize> {
    let pool = a.to_vec();
    for size in 0..=pool.len() {
        for combo in combinations(pool.len(), size) {
            let d = VertexSet::from_indices(g.n(), combo.iter().map(|&k| pool[k])).unwrap();
            if g.dominates(&d, b) {
                return Some(size);
            }
        }
    }
    None
}

/// Uniformly random subset of `0..n`, nonempty.
pub fn random_subset(rng: &mut StreamRng, n: usize) -> VertexSet {
    loop {
        let s = VertexSet::from_indices(n, (0..n).filter(|_| rng.next_f64() < 0.5)).unwrap();
        if !s.is_empty() {
            return s;
        }
    }
}
