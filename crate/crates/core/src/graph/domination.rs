use std::collections::HashMap;
use std::fmt;

use super::{FeedbackGraph, VertexSet};
use crate::error::{Error, Result};

/// Default limit on `|A|` for [`exact_dominating_number`].
pub const EXACT_DOMINATION_GUARD: usize = 20;

/// A dominating number, which is infinite when no dominating set exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DomNumber {
    Finite(usize),
    Infinite,
}

impl DomNumber {
    pub fn finite(self) -> Option<usize> {
        match self {
            DomNumber::Finite(k) => Some(k),
            DomNumber::Infinite => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            DomNumber::Finite(k) => k as f64,
            DomNumber::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for DomNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomNumber::Finite(k) => write!(f, "{k}"),
            DomNumber::Infinite => f.write_str("inf"),
        }
    }
}

/// Greedy set cover: repeatedly take the vertex of `a` that observes the
/// most still-uncovered members of `b`, smallest index on ties.
///
/// Fails up front when `a` does not dominate `b`.
pub fn greedy_dominating_set(
    g: &FeedbackGraph,
    a: &VertexSet,
    b: &VertexSet,
) -> Result<VertexSet> {
    if !g.dominates(a, b) {
        return Err(Error::NotDominating {
            dominator: a.to_vec(),
            target: b.to_vec(),
        });
    }
    let mut remaining = b.clone();
    let mut chosen = VertexSet::empty(g.n());
    while !remaining.is_empty() {
        let mut best = None;
        let mut best_gain = 0;
        for v in a {
            let gain = g.out_neighborhood(v).intersection_len(&remaining);
            if gain > best_gain {
                best_gain = gain;
                best = Some(v);
            }
        }
        let v = best.expect("domination was checked, some vertex must make progress");
        chosen.insert(v);
        remaining.difference_with(g.out_neighborhood(v));
    }
    Ok(chosen)
}

/// `δ^A(B)`: the size of the smallest `D ⊆ A` dominating `B`, with the
/// default guard on `|A|`.
pub fn exact_dominating_number(
    g: &FeedbackGraph,
    a: &VertexSet,
    b: &VertexSet,
) -> Result<DomNumber> {
    exact_dominating_number_with_guard(g, a, b, EXACT_DOMINATION_GUARD)
}

pub fn exact_dominating_number_with_guard(
    g: &FeedbackGraph,
    a: &VertexSet,
    b: &VertexSet,
    guard: usize,
) -> Result<DomNumber> {
    if a.len() > guard {
        return Err(Error::SizeGuard {
            size: a.len(),
            limit: guard,
        });
    }
    if b.is_empty() {
        return Ok(DomNumber::Finite(0));
    }
    if !g.dominates(a, b) {
        return Ok(DomNumber::Infinite);
    }
    // Only vertices that see part of `b` matter; each is reduced to the
    // part of `b` it covers.
    let covers: Vec<VertexSet> = a
        .iter()
        .map(|v| g.out_neighborhood(v).intersection(b))
        .filter(|c| !c.is_empty())
        .collect();
    let upper = greedy_dominating_set(g, a, b)?.len();
    let mut search = CoverSearch {
        covers: &covers,
        best: upper,
        seen: HashMap::new(),
    };
    search.run(b.clone(), 0);
    Ok(DomNumber::Finite(search.best))
}

/// Branch and bound over set covers, memoized on the uncovered remainder.
struct CoverSearch<'a> {
    covers: &'a [VertexSet],
    best: usize,
    // uncovered set -> smallest depth at which it has been expanded
    seen: HashMap<VertexSet, usize>,
}

impl CoverSearch<'_> {
    fn run(&mut self, uncovered: VertexSet, depth: usize) {
        if uncovered.is_empty() {
            self.best = self.best.min(depth);
            return;
        }
        if depth + 1 >= self.best {
            return;
        }
        let max_gain = self
            .covers
            .iter()
            .map(|c| c.intersection_len(&uncovered))
            .max()
            .unwrap_or(0);
        if max_gain == 0 {
            return;
        }
        let lower = uncovered.len().div_ceil(max_gain);
        if depth + lower >= self.best {
            return;
        }
        match self.seen.get(&uncovered) {
            Some(&d) if d <= depth => return,
            _ => {
                self.seen.insert(uncovered.clone(), depth);
            }
        }
        // Branch on the uncovered element with the fewest covering choices.
        let pivot = uncovered
            .iter()
            .min_by_key(|&x| self.covers.iter().filter(|c| c.contains(x)).count())
            .expect("non-empty");
        let mut options: Vec<&VertexSet> =
            self.covers.iter().filter(|c| c.contains(pivot)).collect();
        options.sort_by_key(|c| std::cmp::Reverse(c.intersection_len(&uncovered)));
        for c in options {
            self.run(uncovered.difference(c), depth + 1);
        }
    }
}
