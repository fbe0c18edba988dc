use std::collections::{BTreeMap, HashMap};

use super::{
    check_horizon, exponential_weights, loss_estimates, partition::exploration_distribution,
    partition_actions, Feedback, Partition, Policy, PolicyKind,
};
use crate::complexity::{split_proxies, SplitResult, Tolerance};
use crate::distribution::ActionDistribution;
use crate::error::{Error, Result};
use crate::graph::{FeedbackGraph, VertexSet};

/// Mutable state of Exp3-EX for one run.
#[derive(Debug, Clone)]
pub struct Exp3ExState<'g> {
    graph: &'g FeedbackGraph,
    horizon: u64,
    /// Completed rounds.
    t: u64,
    cum_loss_est: Vec<f64>,
    eta: f64,
    gamma: f64,
    /// Running minimum of every bucket rate seen so far, starting at `T^-1/2`.
    eta_floor: f64,
    proxy_cache: Option<HashMap<VertexSet, SplitResult>>,
    tolerance: Tolerance,
}

/// What went into one round's distribution.
#[derive(Debug, Clone)]
pub struct RoundDiagnostics {
    /// 1-based round index.
    pub round: u64,
    pub eta: f64,
    pub gamma: f64,
    pub q: ActionDistribution,
    pub u: ActionDistribution,
    pub partition: Partition,
    pub proxies: BTreeMap<(usize, usize), SplitResult>,
}

impl<'g> Exp3ExState<'g> {
    pub fn new(graph: &'g FeedbackGraph, horizon: u64, proxy_cache: bool) -> Result<Self> {
        check_horizon(horizon)?;
        let eta = 1.0 / (horizon as f64).sqrt();
        Ok(Self {
            graph,
            horizon,
            t: 0,
            cum_loss_est: vec![0.0; graph.n()],
            eta,
            gamma: gamma_for(eta, horizon),
            eta_floor: eta,
            proxy_cache: proxy_cache.then(HashMap::new),
            tolerance: Tolerance::Default,
        })
    }

    pub fn graph(&self) -> &'g FeedbackGraph {
        self.graph
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Number of completed rounds.
    pub fn rounds(&self) -> u64 {
        self.t
    }

    /// `L̂_{t-1}`.
    pub fn cum_loss_est(&self) -> &[f64] {
        &self.cum_loss_est
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Number of memoized proxy splits (0 with caching off).
    pub fn cached_proxies(&self) -> usize {
        self.proxy_cache.as_ref().map_or(0, HashMap::len)
    }

    fn proxy(&mut self, bucket: &VertexSet) -> Result<SplitResult> {
        if let Some(hit) = self.proxy_cache.as_ref().and_then(|c| c.get(bucket)) {
            return Ok(hit.clone());
        }
        let split = split_proxies(self.graph, bucket, self.horizon, self.tolerance)?;
        if let Some(cache) = self.proxy_cache.as_mut() {
            cache.insert(bucket.clone(), split.clone());
        }
        Ok(split)
    }
}

fn gamma_for(eta: f64, horizon: u64) -> f64 {
    (1.0 / (eta * horizon as f64)).min(0.5)
}

/// Builds `p_t`.
///
/// `q_t` uses the rate carried over from earlier rounds; the buckets of
/// `q_t` then contribute their own rates and `η_t` is the minimum of both.
/// `γ_t` and the mixture use the final `η_t`.
pub fn exp3ex_distribution(
    state: &mut Exp3ExState<'_>,
) -> Result<(ActionDistribution, RoundDiagnostics)> {
    let n = state.graph.n();
    let round = state.t + 1;
    let q = ActionDistribution::full(exponential_weights(state.eta_floor, &state.cum_loss_est))?;
    let partition = partition_actions(&q, state.graph)?;
    let mut proxies = BTreeMap::new();
    let mut eta = state.eta_floor;
    if n > 1 {
        let buckets: Vec<_> = partition.buckets().map(|(k, s)| (k, s.clone())).collect();
        for (key, set) in buckets {
            let split = state.proxy(&set)?;
            eta = eta.min(split.rate(state.horizon));
            proxies.insert(key, split);
        }
    }
    state.eta_floor = eta;
    state.eta = eta;
    state.gamma = gamma_for(eta, state.horizon);
    let gamma = state.gamma;

    let u = if n > 1 {
        exploration_distribution(&partition, &proxies, n)?
    } else {
        ActionDistribution::uniform(1)
    };
    let probs = q
        .probs()
        .iter()
        .zip(u.probs())
        .map(|(&qi, &ui)| (1.0 - gamma) * qi + gamma * ui)
        .collect();
    let p = ActionDistribution::full(probs)?;
    Ok((
        p,
        RoundDiagnostics {
            round,
            eta,
            gamma,
            q,
            u,
            partition,
            proxies,
        },
    ))
}

/// Adds the round's importance-weighted estimates to `L̂`.
pub fn exp3ex_update(
    state: &mut Exp3ExState<'_>,
    fb: &Feedback,
    p_used: &ActionDistribution,
) -> Result<()> {
    fb.validate(state.graph)?;
    if p_used.len() != state.graph.n() {
        return Err(Error::Contract(format!(
            "distribution over {} arms for a graph on {}",
            p_used.len(),
            state.graph.n()
        )));
    }
    let est = loss_estimates(state.graph, fb, p_used.probs())?;
    for (l, e) in state.cum_loss_est.iter_mut().zip(est) {
        *l += e;
    }
    state.t += 1;
    Ok(())
}

/// Exp3-EX as a [`Policy`].
#[derive(Debug, Clone)]
pub struct Exp3Ex<'g> {
    state: Exp3ExState<'g>,
    last: Option<RoundDiagnostics>,
    keep_diagnostics: bool,
}

impl<'g> Exp3Ex<'g> {
    pub fn new(graph: &'g FeedbackGraph, horizon: u64, proxy_cache: bool) -> Result<Self> {
        Ok(Self {
            state: Exp3ExState::new(graph, horizon, proxy_cache)?,
            last: None,
            keep_diagnostics: false,
        })
    }

    /// Keep the diagnostics of the latest round (see [`Exp3Ex::last_round`]).
    pub fn with_diagnostics(mut self) -> Self {
        self.keep_diagnostics = true;
        self
    }

    pub fn state(&self) -> &Exp3ExState<'g> {
        &self.state
    }

    pub fn last_round(&self) -> Option<&RoundDiagnostics> {
        self.last.as_ref()
    }
}

impl Policy for Exp3Ex<'_> {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Exp3Ex
    }

    fn distribution(&mut self) -> Result<ActionDistribution> {
        let (p, diag) = exp3ex_distribution(&mut self.state)?;
        if self.keep_diagnostics {
            self.last = Some(diag);
        }
        Ok(p)
    }

    fn update(&mut self, fb: &Feedback, p_used: &ActionDistribution) -> Result<()> {
        exp3ex_update(&mut self.state, fb, p_used)
    }
}
