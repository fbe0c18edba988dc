//! Directed feedback graphs over actions `0..n`.
//!
//! Playing action `i` reveals the losses of every `j` with an edge `i -> j`.
//! Self-loops are always present, so the played action is always observed.

mod domination;
mod generators;
mod independence;
mod set;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use domination::{
    exact_dominating_number, exact_dominating_number_with_guard, greedy_dominating_set,
    DomNumber, EXACT_DOMINATION_GUARD,
};
pub use generators::{gen_edgeless, gen_random, gen_star, gen_union_of_stars};
pub use independence::{
    exact_independence_number, exact_independence_number_with_guard, greedy_independent_set,
    EXACT_INDEPENDENCE_GUARD,
};
pub use set::VertexSet;

/// Immutable directed graph with mandatory self-loops.
///
/// Both the out-rows and the in-rows are kept as dense bit sets.
#[derive(Clone, PartialEq, Eq)]
pub struct FeedbackGraph {
    n: usize,
    out_rows: Vec<VertexSet>,
    in_rows: Vec<VertexSet>,
}

impl std::fmt::Debug for FeedbackGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FeedbackGraph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl FeedbackGraph {
    /// Builds a graph from an edge list. Self-loops are added for every
    /// vertex; duplicate and explicit self-loop edges are accepted.
    pub fn build<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(Error::Construction("a graph needs at least one vertex".into()));
        }
        let mut out_rows = vec![VertexSet::empty(n); n];
        let mut in_rows = vec![VertexSet::empty(n); n];
        for i in 0..n {
            out_rows[i].insert(i);
            in_rows[i].insert(i);
        }
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Construction(format!(
                    "edge ({i}, {j}) out of range for {n} vertices"
                )));
            }
            out_rows[i].insert(j);
            in_rows[j].insert(i);
        }
        Ok(Self { n, out_rows, in_rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.out_rows[i].contains(j)
    }

    /// `{j : (i, j) ∈ E}`; always contains `i`.
    pub fn out_neighborhood(&self, i: usize) -> &VertexSet {
        &self.out_rows[i]
    }

    /// `{j : (j, i) ∈ E}`; always contains `i`.
    pub fn in_neighborhood(&self, i: usize) -> &VertexSet {
        &self.in_rows[i]
    }

    /// Non-loop edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.out_rows[i]
                .iter()
                .filter(move |&j| j != i)
                .map(move |j| (i, j))
        })
    }

    /// Union of the out-neighborhoods of `set`.
    pub fn covered_by(&self, set: &VertexSet) -> VertexSet {
        let mut cov = VertexSet::empty(self.n);
        for v in set {
            cov.union_with(&self.out_rows[v]);
        }
        cov
    }

    /// Union of the in-neighborhoods of `set`: every vertex that observes
    /// at least one member.
    pub fn observers_of(&self, set: &VertexSet) -> VertexSet {
        let mut obs = VertexSet::empty(self.n);
        for v in set {
            obs.union_with(&self.in_rows[v]);
        }
        obs
    }

    /// Whether `a` dominates `b`, i.e. `b ⊆ ∪_{v∈a} N^out_v`.
    pub fn dominates(&self, a: &VertexSet, b: &VertexSet) -> bool {
        b.is_subset(&self.covered_by(a))
    }

    /// Vertices whose out-neighborhood is the whole vertex set.
    pub fn hubs(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.out_rows[i].len() == self.n).collect()
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.n,
            edges: self.edges().map(|(i, j)| [i, j]).collect(),
        }
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        Self::build(file.n, file.edges.iter().map(|e| (e[0], e[1])))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// On-disk graph format: `{"n": <int>, "edges": [[i, j], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}
