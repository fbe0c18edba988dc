//! Graph problem complexities.
//!
//! * `Q*_{I,Δ}` is the value of the cheapest stationary exploration policy
//!   that observes every arm of `I` at least `1/Δ²` times in expectation,
//!   where playing inside `I` costs `Δ` per round and outside costs `1`,
//!   capped at `TΔ`. `Q*_I` maximizes it over a geometric grid of gaps.
//! * `R*_I` is the combinatorial counterpart: split `I` into a part `J`
//!   explored from inside (`√(δ^I(J)·T)`) and a part `I \ J` explored from
//!   anywhere (`δ^V(I\J)^{1/3}·T^{2/3}`), taking the best split.
//!
//! Both are maximized over `I` to get `Q*` and `R*`.

mod analyze;
mod proxies;

use std::collections::HashMap;

use crate::distribution::ActionDistribution;
use crate::error::{Error, Result};
use crate::graph::{exact_dominating_number_with_guard, DomNumber, FeedbackGraph, VertexSet};
use crate::lp::{default_tolerance, solve_lp, LinearProgram};

pub use analyze::{analyze, AnalysisMode, ComplexityReport, Regime};
pub use proxies::{split_proxies, SplitResult};

/// Limit on `|I|` for [`r_complexity_set`] (every `J ⊆ I` is enumerated).
pub const R_SET_GUARD: usize = 10;
/// Limit on `n` for [`r_complexity`] (every pair `J ⊆ I ⊆ V` is enumerated).
pub const R_GRAPH_GUARD: usize = 10;

/// Relative LP slack used by the complexity programs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Tolerance {
    /// `Δ²/(N⁴T²)` clamped below at `1e-12`.
    #[default]
    Default,
    Fixed(f64),
}

impl Tolerance {
    fn resolve(self, delta: f64, n: usize, horizon: u64) -> f64 {
        match self {
            Tolerance::Default => default_tolerance(delta, n, horizon),
            Tolerance::Fixed(eps) => eps,
        }
    }
}

/// Gap grid `{2^-1, 2^-2, …, 2^-(⌊log₂(NT)⌋+1)}`, largest first.
pub fn delta_grid(n: usize, horizon: u64) -> Vec<f64> {
    let levels = (n as u64 * horizon).max(1).ilog2() + 1;
    (1..=levels).map(|k| 0.5f64.powi(k as i32)).collect()
}

fn check_horizon(horizon: u64) -> Result<()> {
    if horizon == 0 {
        return Err(Error::Parameter("horizon T must be at least 1".into()));
    }
    Ok(())
}

fn check_nonempty(set: &VertexSet) -> Result<()> {
    if set.is_empty() {
        return Err(Error::Parameter("the near-optimal set I must be nonempty".into()));
    }
    Ok(())
}

/// Outcome of one `Q*_{I,Δ}` program.
#[derive(Debug, Clone)]
pub struct FixedDeltaValue {
    pub value: f64,
    /// LP minimizer, or the zero sub-distribution when the program is
    /// infeasible.
    pub policy: ActionDistribution,
    pub feasible: bool,
}

/// `Q*_{I,Δ} = min( min_{π∈Π} T·Σ_{i∈I}π_iΔ + T·Σ_{i∉I}π_i , TΔ )`, and
/// `TΔ` when `Π` is empty.
pub fn q_complexity_fixed_delta(
    g: &FeedbackGraph,
    near_optimal: &VertexSet,
    delta: f64,
    horizon: u64,
    tolerance: Tolerance,
) -> Result<FixedDeltaValue> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::Parameter(format!("gap {delta} not in (0, 1/2]")));
    }
    check_horizon(horizon)?;
    check_nonempty(near_optimal)?;
    let n = g.n();
    let t = horizon as f64;
    let cap_value = t * delta;
    let eps = tolerance.resolve(delta, n, horizon);

    // Vertices observing nothing in I carry positive cost and no coverage,
    // so they are zero at every optimum and left out of the program.
    let vars: Vec<usize> = g.observers_of(near_optimal).to_vec();
    let objective = vars
        .iter()
        .map(|&i| if near_optimal.contains(i) { t * delta } else { t })
        .collect();
    let mut lp = LinearProgram::new(objective, 1.0);
    let need = 1.0 / (delta * delta);
    for j in near_optimal {
        let row = vars
            .iter()
            .map(|&i| if g.has_edge(i, j) { t } else { 0.0 })
            .collect();
        lp.ge_constraints.push((row, need));
    }
    let sol = solve_lp(&lp, eps)?;
    if !sol.is_optimal() {
        return Ok(FixedDeltaValue {
            value: cap_value,
            policy: ActionDistribution::zero(n),
            feasible: false,
        });
    }
    let mut pi = vec![0.0; n];
    for (&i, &x) in vars.iter().zip(&sol.x) {
        pi[i] = x;
    }
    // Coverage rows are homogeneous in π, so scaling by 1/(1-ε) undoes the
    // right-hand-side relaxation; the mass is kept within Σπ <= 1.
    let mass: f64 = pi.iter().sum();
    let scale = if mass > 0.0 {
        (1.0 / (1.0 - eps)).min(1.0 / mass)
    } else {
        1.0
    };
    pi.iter_mut().for_each(|p| *p *= scale);
    let value = sol.objective_value * scale;
    Ok(FixedDeltaValue {
        value: value.min(cap_value),
        policy: ActionDistribution::sub(pi)?,
        feasible: true,
    })
}

/// `Q*_I` maximized over [`delta_grid`].
pub fn q_complexity(
    g: &FeedbackGraph,
    near_optimal: &VertexSet,
    horizon: u64,
    tolerance: Tolerance,
) -> Result<f64> {
    check_horizon(horizon)?;
    check_nonempty(near_optimal)?;
    let mut best = 0.0f64;
    for delta in delta_grid(g.n(), horizon) {
        let v = q_complexity_fixed_delta(g, near_optimal, delta, horizon, tolerance)?;
        best = best.max(v.value);
    }
    Ok(best)
}

/// `max{ √(d_in·T), d_out^{1/3}·T^{2/3} }` with empty parts contributing 0.
/// The second term is evaluated as `∛(d_out·T²)`, exact for perfect cubes.
pub fn split_criterion(inside: usize, outside: usize, horizon: u64) -> f64 {
    let t = horizon as f64;
    let a = if inside == 0 { 0.0 } else { (inside as f64 * t).sqrt() };
    let b = if outside == 0 {
        0.0
    } else {
        (outside as f64 * t * t).cbrt()
    };
    a.max(b)
}

fn dom_criterion(inside: DomNumber, outside: DomNumber, horizon: u64) -> f64 {
    match (inside.finite(), outside.finite()) {
        (Some(a), Some(b)) => split_criterion(a, b, horizon),
        _ => f64::INFINITY,
    }
}

/// Memo of exact dominating numbers keyed by `(A, B)`.
#[derive(Debug, Default)]
pub struct DominationCache {
    memo: HashMap<(VertexSet, VertexSet), DomNumber>,
}

impl DominationCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, g: &FeedbackGraph, a: &VertexSet, b: &VertexSet) -> Result<DomNumber> {
        if b.is_empty() {
            return Ok(DomNumber::Finite(0));
        }
        // Only the part of A that sees B matters, which also makes keys
        // for A = V and A ⊇ N^in(B) coincide.
        let a = a.intersection(&g.observers_of(b));
        let key = (a, b.clone());
        if let Some(&d) = self.memo.get(&key) {
            return Ok(d);
        }
        // |B| bounds the search depth, so the |A| guard is lifted here.
        let d = exact_dominating_number_with_guard(g, &key.0, &key.1, usize::MAX)?;
        self.memo.insert(key, d);
        Ok(d)
    }
}

/// `R*_I` and a minimizing `J`; `(0, ∅)` for empty `I`.
pub fn r_complexity_set(
    g: &FeedbackGraph,
    near_optimal: &VertexSet,
    horizon: u64,
) -> Result<(f64, VertexSet)> {
    r_complexity_set_cached(g, near_optimal, horizon, &mut DominationCache::new())
}

pub fn r_complexity_set_cached(
    g: &FeedbackGraph,
    near_optimal: &VertexSet,
    horizon: u64,
    cache: &mut DominationCache,
) -> Result<(f64, VertexSet)> {
    check_horizon(horizon)?;
    let members = near_optimal.to_vec();
    if members.len() > R_SET_GUARD {
        return Err(Error::SizeGuard {
            size: members.len(),
            limit: R_SET_GUARD,
        });
    }
    let n = g.n();
    if members.is_empty() {
        return Ok((0.0, VertexSet::empty(n)));
    }
    let all = g.vertices();
    let mut best = (f64::INFINITY, VertexSet::empty(n));
    for mask in 0u32..(1 << members.len()) {
        let inside = VertexSet::from_indices(
            n,
            members
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &v)| v),
        )?;
        let outside = near_optimal.difference(&inside);
        let d_in = cache.get(g, near_optimal, &inside)?;
        let d_out = cache.get(g, &all, &outside)?;
        let value = dom_criterion(d_in, d_out, horizon);
        if value < best.0 {
            best = (value, inside);
        }
    }
    Ok(best)
}

/// `R* = max_I R*_I` by full enumeration.
pub fn r_complexity(g: &FeedbackGraph, horizon: u64) -> Result<f64> {
    let n = g.n();
    if n > R_GRAPH_GUARD {
        return Err(Error::SizeGuard {
            size: n,
            limit: R_GRAPH_GUARD,
        });
    }
    let mut cache = DominationCache::new();
    let mut best = 0.0f64;
    for mask in 1u32..(1 << n) {
        let set = VertexSet::from_indices(n, (0..n).filter(|k| mask >> k & 1 == 1))?;
        let (v, _) = r_complexity_set_cached(g, &set, horizon, &mut cache)?;
        best = best.max(v);
    }
    Ok(best)
}
