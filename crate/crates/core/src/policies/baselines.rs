use super::{check_horizon, exponential_weights, loss_estimates, Feedback, Policy, PolicyKind};
use crate::distribution::ActionDistribution;
use crate::error::{Error, Result};
use crate::graph::{
    exact_independence_number, greedy_independent_set, FeedbackGraph, EXACT_INDEPENDENCE_GUARD,
};

/// Exponential weights with the graph estimator and no extra exploration,
/// at the fixed rate `η = √(ln N / (αT))`.
#[derive(Debug, Clone)]
pub struct Exp3Set<'g> {
    graph: &'g FeedbackGraph,
    eta: f64,
    cum_loss_est: Vec<f64>,
}

impl<'g> Exp3Set<'g> {
    /// `α` is exact up to [`EXACT_INDEPENDENCE_GUARD`] vertices and the size
    /// of a greedy maximal independent set beyond.
    pub fn new(graph: &'g FeedbackGraph, horizon: u64) -> Result<Self> {
        check_horizon(horizon)?;
        let n = graph.n();
        let alpha = if n <= EXACT_INDEPENDENCE_GUARD {
            exact_independence_number(graph)?
        } else {
            greedy_independent_set(graph).len()
        };
        let eta = ((n as f64).ln() / (alpha as f64 * horizon as f64)).sqrt();
        Ok(Self {
            graph,
            eta,
            cum_loss_est: vec![0.0; n],
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn cum_loss_est(&self) -> &[f64] {
        &self.cum_loss_est
    }
}

impl Policy for Exp3Set<'_> {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Exp3Set
    }

    fn distribution(&mut self) -> Result<ActionDistribution> {
        ActionDistribution::full(exponential_weights(self.eta, &self.cum_loss_est))
    }

    fn update(&mut self, fb: &Feedback, p_used: &ActionDistribution) -> Result<()> {
        fb.validate(self.graph)?;
        let est = loss_estimates(self.graph, fb, p_used.probs())?;
        for (l, e) in self.cum_loss_est.iter_mut().zip(est) {
            *l += e;
        }
        Ok(())
    }
}

/// Plays `hub` for `⌈T^{2/3}⌉` rounds, then commits to the arm with the
/// smallest empirical mean loss (smallest index on ties).
#[derive(Debug, Clone)]
pub struct EtcHub<'g> {
    graph: &'g FeedbackGraph,
    hub: usize,
    explore_rounds: u64,
    played: u64,
    loss_sums: Vec<f64>,
    counts: Vec<u64>,
    committed: Option<usize>,
}

impl<'g> EtcHub<'g> {
    pub fn new(graph: &'g FeedbackGraph, horizon: u64, hub: usize) -> Result<Self> {
        check_horizon(horizon)?;
        let n = graph.n();
        if hub >= n || graph.out_neighborhood(hub).len() != n {
            return Err(Error::Parameter(format!(
                "vertex {hub} does not observe every arm"
            )));
        }
        let t = horizon as f64;
        let explore_rounds = ((t * t).cbrt().ceil() as u64).min(horizon);
        Ok(Self {
            graph,
            hub,
            explore_rounds,
            played: 0,
            loss_sums: vec![0.0; n],
            counts: vec![0; n],
            committed: None,
        })
    }

    pub fn explore_rounds(&self) -> u64 {
        self.explore_rounds
    }

    pub fn committed(&self) -> Option<usize> {
        self.committed
    }

    fn commit(&mut self) -> usize {
        let mut best = 0;
        let mut best_mean = f64::INFINITY;
        for (i, (&s, &c)) in self.loss_sums.iter().zip(&self.counts).enumerate() {
            let mean = if c == 0 { f64::INFINITY } else { s / c as f64 };
            if mean < best_mean {
                best_mean = mean;
                best = i;
            }
        }
        self.committed = Some(best);
        best
    }
}

impl Policy for EtcHub<'_> {
    fn kind(&self) -> PolicyKind {
        PolicyKind::EtcHub
    }

    fn distribution(&mut self) -> Result<ActionDistribution> {
        let n = self.graph.n();
        if self.played < self.explore_rounds {
            return Ok(ActionDistribution::point(n, self.hub));
        }
        let arm = match self.committed {
            Some(a) => a,
            None => self.commit(),
        };
        Ok(ActionDistribution::point(n, arm))
    }

    fn update(&mut self, fb: &Feedback, _p_used: &ActionDistribution) -> Result<()> {
        fb.validate(self.graph)?;
        if self.played < self.explore_rounds {
            for (&i, &l) in &fb.observed {
                self.loss_sums[i] += l;
                self.counts[i] += 1;
            }
        }
        self.played += 1;
        Ok(())
    }
}
