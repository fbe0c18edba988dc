use super::{check_horizon, check_nonempty, delta_grid, q_complexity_fixed_delta, split_criterion, Tolerance};
use crate::distribution::ActionDistribution;
use crate::error::{Error, Result};
use crate::graph::{greedy_dominating_set, FeedbackGraph, VertexSet};

/// Tractable stand-ins for the optimal split of a set `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    /// `J̄`: arms receiving at least half of their observations from `I`.
    pub inside: VertexSet,
    /// `J̄' = I \ J̄`.
    pub outside: VertexSet,
    /// `D̄ ⊆ I`, greedy dominating set of `J̄`.
    pub inside_dominators: VertexSet,
    /// `D̄' ⊆ V`, greedy dominating set of `J̄'`.
    pub outside_dominators: VertexSet,
    /// Selected gap `Δ̄`.
    pub gap: f64,
    /// LP policy at `Δ̄` (zero when every grid point was infeasible).
    pub policy: ActionDistribution,
    /// `max{ |D̄|^{1/2}T^{1/2}, |D̄'|^{1/3}T^{2/3} }`.
    pub criterion_value: f64,
}

impl SplitResult {
    /// Learning-rate bound `min{ |D̄|^{-1/2}T^{-1/2}, |D̄'|^{-1/3}T^{-2/3} }`;
    /// an empty dominating set imposes no bound.
    pub fn rate(&self, horizon: u64) -> f64 {
        bucket_rate(
            self.inside_dominators.len(),
            self.outside_dominators.len(),
            horizon,
        )
    }
}

pub(crate) fn bucket_rate(inside: usize, outside: usize, horizon: u64) -> f64 {
    let t = horizon as f64;
    let a = if inside == 0 {
        f64::INFINITY
    } else {
        1.0 / (inside as f64 * t).sqrt()
    };
    let b = if outside == 0 {
        f64::INFINITY
    } else {
        1.0 / (outside as f64 * t * t).cbrt()
    };
    a.min(b)
}

/// `J̄ = {j ∈ I : Σ_{i∈I} π_i G_{i,j} >= ½ Σ_i π_i G_{i,j}}`.
fn explored_from_inside(g: &FeedbackGraph, set: &VertexSet, pi: &[f64]) -> VertexSet {
    let mut inside = VertexSet::empty(g.n());
    for j in set {
        let mut from_inside = 0.0;
        let mut total = 0.0;
        for i in g.in_neighborhood(j) {
            total += pi[i];
            if set.contains(i) {
                from_inside += pi[i];
            }
        }
        if from_inside >= 0.5 * total {
            inside.insert(j);
        }
    }
    inside
}

/// Builds `J̄, J̄', D̄, D̄'` for `I`: solve the `Q*_{I,Δ}` program on each
/// grid gap, split `I` by where each arm's observations come from, cover
/// both halves greedily, and keep the gap with the smallest criterion
/// (ties go to the larger gap). Infeasible gaps are skipped; when none is
/// feasible, `I` is explored from inside.
pub fn split_proxies(
    g: &FeedbackGraph,
    near_optimal: &VertexSet,
    horizon: u64,
    tolerance: Tolerance,
) -> Result<SplitResult> {
    check_horizon(horizon)?;
    check_nonempty(near_optimal)?;
    let all = g.vertices();
    let grid = delta_grid(g.n(), horizon);
    let mut best: Option<SplitResult> = None;
    for &delta in &grid {
        let fixed = q_complexity_fixed_delta(g, near_optimal, delta, horizon, tolerance)?;
        if !fixed.feasible {
            continue;
        }
        let inside = explored_from_inside(g, near_optimal, fixed.policy.probs());
        let outside = near_optimal.difference(&inside);
        let inside_dominators = greedy_dominating_set(g, near_optimal, &inside)?;
        let outside_dominators = greedy_dominating_set(g, &all, &outside)?;
        let criterion_value =
            split_criterion(inside_dominators.len(), outside_dominators.len(), horizon);
        if best
            .as_ref()
            .is_none_or(|b| criterion_value < b.criterion_value)
        {
            best = Some(SplitResult {
                inside,
                outside,
                inside_dominators,
                outside_dominators,
                gap: delta,
                policy: fixed.policy,
                criterion_value,
            });
        }
    }
    let result = match best {
        Some(r) => r,
        None => {
            let inside_dominators = greedy_dominating_set(g, near_optimal, near_optimal)?;
            SplitResult {
                inside: near_optimal.clone(),
                outside: VertexSet::empty(g.n()),
                criterion_value: split_criterion(inside_dominators.len(), 0, horizon),
                inside_dominators,
                outside_dominators: VertexSet::empty(g.n()),
                gap: grid[0],
                policy: ActionDistribution::zero(g.n()),
            }
        }
    };
    check_split(g, near_optimal, &result)?;
    Ok(result)
}

fn check_split(g: &FeedbackGraph, set: &VertexSet, r: &SplitResult) -> Result<()> {
    let ok = r.inside.is_disjoint(&r.outside)
        && r.inside.union(&r.outside) == *set
        && r.inside_dominators.is_subset(set)
        && g.dominates(&r.inside_dominators, &r.inside)
        && g.dominates(&r.outside_dominators, &r.outside)
        && g.dominates(&r.inside_dominators.union(&r.outside_dominators), set);
    if ok {
        Ok(())
    } else {
        Err(Error::Invariant(format!(
            "proxy split of {set:?} is not a covered partition"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_edgeless, gen_random, gen_star};
    use approx::assert_abs_diff_eq;

    #[test]
    fn star_leaves_are_explored_through_the_hub() {
        let g = gen_star(10).unwrap();
        let leaves = VertexSet::from_indices(10, 0..9).unwrap();
        let r = split_proxies(&g, &leaves, 30, Tolerance::Default).unwrap();
        assert!(r.inside.is_empty());
        assert_eq!(r.outside, leaves);
        assert_eq!(r.outside_dominators.to_vec(), vec![9]);
        assert_abs_diff_eq!(r.criterion_value, 30f64.powf(2.0 / 3.0), epsilon = 1e-9);
        assert_eq!(r.gap, 0.5);
        assert_abs_diff_eq!(r.policy[9], 4.0 / 30.0, epsilon = 1e-9);
    }

    #[test]
    fn edgeless_is_explored_from_inside() {
        let g = gen_edgeless(3).unwrap();
        let r = split_proxies(&g, &g.vertices(), 1000, Tolerance::Default).unwrap();
        assert_eq!(r.inside, g.vertices());
        assert_eq!(r.inside_dominators, g.vertices());
        assert!(r.outside_dominators.is_empty());
        assert_abs_diff_eq!(r.criterion_value, 3000f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn all_infeasible_falls_back_to_inside() {
        // T = 2: even Δ = 1/2 needs 2 observations per round.
        let g = gen_edgeless(2).unwrap();
        let r = split_proxies(&g, &g.vertices(), 2, Tolerance::Default).unwrap();
        assert_eq!(r.inside, g.vertices());
        assert_eq!(r.policy.total(), 0.0);
    }

    #[test]
    fn singletons_are_covered() {
        for seed in 0..10 {
            let g = gen_random(6, 0.4, seed).unwrap();
            for i in 0..6 {
                let s = VertexSet::singleton(6, i).unwrap();
                for t in [3u64, 50, 500] {
                    let r = split_proxies(&g, &s, t, Tolerance::Default).unwrap();
                    let tf = t as f64;
                    assert!(r.criterion_value <= tf.sqrt().max(tf.powf(2.0 / 3.0)) + 1e-9);
                    assert!(g.dominates(&r.inside_dominators.union(&r.outside_dominators), &s));
                }
            }
        }
    }

    #[test]
    fn rate_formula() {
        assert_abs_diff_eq!(bucket_rate(4, 8, 100), 0.5 * 100f64.powf(-2.0 / 3.0), epsilon = 1e-15);
        assert_abs_diff_eq!(bucket_rate(4, 8, 100), 0.023208, epsilon = 1e-6);
        assert_eq!(bucket_rate(1, 0, 100), 0.1);
        assert_eq!(bucket_rate(0, 0, 100), f64::INFINITY);
    }
}
