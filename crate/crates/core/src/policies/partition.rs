use std::collections::BTreeMap;

use crate::complexity::SplitResult;
use crate::distribution::ActionDistribution;
use crate::error::{Error, Result};
use crate::graph::{FeedbackGraph, VertexSet};

/// `(K, L) = (⌈5 log₂ N⌉, ⌈log₂ N⌉)`, with `K = L = 1` for a single arm.
pub fn level_counts(n: usize) -> (usize, usize) {
    if n <= 1 {
        return (1, 1);
    }
    let l = (n as f64).log2().ceil() as usize;
    let k = (5.0 * (n as f64).log2()).ceil() as usize;
    (k, l)
}

/// Arms grouped by probability level `k` and in-level degree class `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    k_levels: usize,
    l_levels: usize,
    /// Nonempty buckets only.
    buckets: BTreeMap<(usize, usize), VertexSet>,
    tail: VertexSet,
}

impl Partition {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `K`.
    pub fn k_levels(&self) -> usize {
        self.k_levels
    }

    /// `L`.
    pub fn l_levels(&self) -> usize {
        self.l_levels
    }

    /// `I_{k,l}`, or `None` when empty.
    pub fn bucket(&self, k: usize, l: usize) -> Option<&VertexSet> {
        self.buckets.get(&(k, l))
    }

    /// Nonempty buckets in `(k, l)` order.
    pub fn buckets(&self) -> impl Iterator<Item = ((usize, usize), &VertexSet)> + '_ {
        self.buckets.iter().map(|(&key, set)| (key, set))
    }

    /// `I_{K+1}`: arms with `q_i <= 2^-K`.
    pub fn tail(&self) -> &VertexSet {
        &self.tail
    }
}

/// `k` with `q ∈ (2^-k, 2^-k+1]`, or `None` when `q <= 2^-K`.
fn probability_level(q: f64, k_levels: usize) -> Option<usize> {
    if !(q > 0.5f64.powi(k_levels as i32)) {
        return None;
    }
    let mut k = ((-q.log2()).floor() as i64 + 1).max(1) as usize;
    // Correct the floating-point estimate against the exact dyadic bounds.
    while k > 1 && q > 0.5f64.powi(k as i32 - 1) {
        k -= 1;
    }
    while q <= 0.5f64.powi(k as i32) {
        k += 1;
    }
    Some(k)
}

/// `l` with `deg ∈ (N2^-l, N2^-l+1]`, clamped to `L`. A degree of 1 falls
/// below `N2^-L` when `N` is a power of two, so the last class also takes
/// everything under it.
fn degree_class(deg: usize, n: usize, l_levels: usize) -> usize {
    let mut l = 1;
    while l < l_levels && deg as f64 <= n as f64 * 0.5f64.powi(l as i32) {
        l += 1;
    }
    l
}

/// Splits the arms by probability level under `q` and then by the number of
/// out-neighbors inside their own level (self-loop included).
pub fn partition_actions(q: &ActionDistribution, g: &FeedbackGraph) -> Result<Partition> {
    let n = g.n();
    if q.len() != n {
        return Err(Error::Contract(format!(
            "distribution over {} arms for a graph on {n}",
            q.len()
        )));
    }
    let (k_levels, l_levels) = level_counts(n);
    let mut levels = vec![VertexSet::empty(n); k_levels];
    let mut tail = VertexSet::empty(n);
    for i in 0..n {
        match probability_level(q[i], k_levels) {
            Some(k) => levels[k - 1].insert(i),
            None => tail.insert(i),
        }
    }
    let mut buckets = BTreeMap::new();
    for (idx, level) in levels.iter().enumerate() {
        for i in level {
            let deg = g.out_neighborhood(i).intersection_len(level);
            let l = degree_class(deg, n, l_levels);
            buckets
                .entry((idx + 1, l))
                .or_insert_with(|| VertexSet::empty(n))
                .insert(i);
        }
    }
    Ok(Partition {
        n,
        k_levels,
        l_levels,
        buckets,
        tail,
    })
}

/// Mixture `u_i = (1/(KL+1))·(1/N + Σ_{k,l} u^{k,l}_i)`, where `u^{k,l}` is
/// uniform on the bucket's outside dominating set `D̄'`. Empty buckets and
/// empty `D̄'` contribute the uniform distribution over all arms instead, so
/// `u` always has unit mass.
pub fn exploration_distribution(
    partition: &Partition,
    proxies: &BTreeMap<(usize, usize), SplitResult>,
    n: usize,
) -> Result<ActionDistribution> {
    if partition.n() != n {
        return Err(Error::Contract(format!(
            "partition over {} arms, expected {n}",
            partition.n()
        )));
    }
    let slots = partition.k_levels() * partition.l_levels();
    let mut targeted = vec![0.0; n];
    let mut uniform_terms = 1 + slots;
    for (key, _) in partition.buckets() {
        let proxy = proxies.get(&key).ok_or_else(|| {
            Error::Contract(format!("no proxy split for nonempty bucket {key:?}"))
        })?;
        let d = &proxy.outside_dominators;
        if d.is_empty() {
            continue;
        }
        uniform_terms -= 1;
        let w = 1.0 / d.len() as f64;
        for i in d {
            targeted[i] += w;
        }
    }
    let base = uniform_terms as f64 / n as f64;
    let norm = (slots + 1) as f64;
    let probs = targeted.into_iter().map(|x| (base + x) / norm).collect();
    ActionDistribution::full(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::{split_proxies, Tolerance};
    use crate::graph::{gen_edgeless, gen_star};

    #[test]
    fn level_count_examples() {
        assert_eq!(level_counts(1), (1, 1));
        assert_eq!(level_counts(4), (10, 2));
        assert_eq!(level_counts(8), (15, 3));
        assert_eq!(level_counts(5), (12, 3));
    }

    #[test]
    fn probability_levels() {
        let q = ActionDistribution::full(vec![0.5, 0.3, 0.15, 0.05]).unwrap();
        let p = partition_actions(&q, &gen_edgeless(4).unwrap()).unwrap();
        let level_of = |i: usize| p.buckets().find(|(_, s)| s.contains(i)).unwrap().0 .0;
        assert_eq!([level_of(0), level_of(1), level_of(2), level_of(3)], [2, 2, 3, 5]);
        assert!(p.tail().is_empty());
    }

    #[test]
    fn uniform_over_eight() {
        let q = ActionDistribution::uniform(8);
        let p = partition_actions(&q, &gen_edgeless(8).unwrap()).unwrap();
        assert_eq!((p.k_levels(), p.l_levels()), (15, 3));
        // 1/8 lies in (2^-4, 2^-3], so every arm is at level 4; degree 1 is
        // clamped into class L = 3.
        assert_eq!(p.bucket(4, 3).unwrap().len(), 8);
        assert_eq!(p.buckets().count(), 1);
    }

    #[test]
    fn star_degree_classes() {
        // Hub and leaf 0 share level 2; the others sit lower.
        let q = ActionDistribution::full(vec![0.3, 0.2, 0.2, 0.3]).unwrap();
        let p = partition_actions(&q, &gen_star(4).unwrap()).unwrap();
        // Hub degree 2 in (1, 2] -> l = 2; leaf degree 1 clamped to l = 2.
        assert_eq!(p.bucket(2, 2).unwrap().to_vec(), vec![0, 3]);
        assert_eq!(p.bucket(3, 2).unwrap().to_vec(), vec![1, 2]);
        // Hub with the whole star in its level: degree 4 -> l = 1.
        let p = partition_actions(&ActionDistribution::uniform(4), &gen_star(4).unwrap()).unwrap();
        assert_eq!(p.bucket(3, 1).unwrap().to_vec(), vec![3]);
        assert_eq!(p.bucket(3, 2).unwrap().to_vec(), vec![0, 1, 2]);
    }

    #[test]
    fn tiny_probabilities_go_to_the_tail() {
        let mut probs = vec![1e-4; 4];
        probs[0] = 1.0 - 3e-4;
        let q = ActionDistribution::full(probs).unwrap();
        let p = partition_actions(&q, &gen_edgeless(4).unwrap()).unwrap();
        assert_eq!(p.tail().to_vec(), vec![1, 2, 3]);
    }

    #[test]
    fn exploration_with_one_targeted_bucket() {
        let g = gen_star(4).unwrap();
        let q = ActionDistribution::full(vec![0.3, 0.3, 0.3, 0.1]).unwrap();
        let partition = partition_actions(&q, &g).unwrap();
        let mut proxies = BTreeMap::new();
        for (key, set) in partition.buckets() {
            proxies.insert(key, split_proxies(&g, set, 100, Tolerance::Default).unwrap());
        }
        let u = exploration_distribution(&partition, &proxies, 4).unwrap();
        assert!((u.total() - 1.0).abs() < 1e-15);
        assert!(u.min() >= 1.0 / (21.0 * 4.0));
    }

    #[test]
    fn exploration_formula() {
        let g = gen_star(4).unwrap();
        let leaves = VertexSet::from_indices(4, 0..3).unwrap();
        // Leaves at level 2 only; the hub at level 5.
        let q = ActionDistribution::full(vec![0.3, 0.3, 0.3, 0.1]).unwrap();
        let partition = partition_actions(&q, &g).unwrap();
        let mut split = split_proxies(&g, &leaves, 30, Tolerance::Default).unwrap();
        split.outside_dominators = VertexSet::singleton(4, 3).unwrap();
        let mut proxies = BTreeMap::new();
        for (key, _) in partition.buckets() {
            let mut s = split.clone();
            if key.0 != 2 {
                s.outside_dominators = VertexSet::empty(4);
            }
            proxies.insert(key, s);
        }
        let u = exploration_distribution(&partition, &proxies, 4).unwrap();
        assert!((u[3] - 2.0 / 7.0).abs() < 1e-15);
        for i in 0..3 {
            assert!((u[i] - 5.0 / 21.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exploration_empty_is_uniform_and_missing_proxy_fails() {
        let g = gen_edgeless(4).unwrap();
        let partition = partition_actions(&ActionDistribution::uniform(4), &g).unwrap();
        let err = exploration_distribution(&partition, &BTreeMap::new(), 4);
        assert!(matches!(err, Err(Error::Contract(_))));
        let mut proxies = BTreeMap::new();
        for (key, set) in partition.buckets() {
            proxies.insert(key, split_proxies(&g, set, 100, Tolerance::Default).unwrap());
        }
        let u = exploration_distribution(&partition, &proxies, 4).unwrap();
        for i in 0..4 {
            assert!((u[i] - 0.25).abs() < 1e-15);
        }
    }
}
