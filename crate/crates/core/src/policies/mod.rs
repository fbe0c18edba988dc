//! Online learning policies over a feedback graph.
//!
//! Every policy exposes the same round protocol: ask for the distribution
//! `p_t`, let the caller sample `i_t ~ p_t`, then feed back the losses of
//! `N^out(i_t)` together with the `p_t` that was actually used.

mod baselines;
mod exp3ex;
mod partition;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distribution::ActionDistribution;
use crate::error::{Error, Result};
use crate::graph::FeedbackGraph;

pub use baselines::{EtcHub, Exp3Set};
pub use exp3ex::{exp3ex_distribution, exp3ex_update, Exp3Ex, Exp3ExState, RoundDiagnostics};
pub use partition::{exploration_distribution, level_counts, partition_actions, Partition};

/// What the learner sees after playing `chosen`: the losses of its
/// out-neighbors (itself included).
#[derive(Debug, Clone, PartialEq)]
pub struct Feedback {
    pub chosen: usize,
    pub observed: BTreeMap<usize, f64>,
}

impl Feedback {
    /// Reveals `losses[j]` for every `j ∈ N^out(chosen)`.
    pub fn from_losses(g: &FeedbackGraph, chosen: usize, losses: &[f64]) -> Self {
        let observed = g
            .out_neighborhood(chosen)
            .iter()
            .map(|j| (j, losses[j]))
            .collect();
        Self { chosen, observed }
    }

    /// Checks that the observed keys are exactly `N^out(chosen)` and the
    /// losses lie in `[0, 1]`.
    pub fn validate(&self, g: &FeedbackGraph) -> Result<()> {
        if self.chosen >= g.n() {
            return Err(Error::Contract(format!(
                "chosen arm {} outside 0..{}",
                self.chosen,
                g.n()
            )));
        }
        let out = g.out_neighborhood(self.chosen);
        if self.observed.len() != out.len() || !self.observed.keys().all(|&j| out.contains(j)) {
            return Err(Error::Contract(format!(
                "feedback for arm {} does not match its out-neighborhood",
                self.chosen
            )));
        }
        if let Some((j, l)) = self.observed.iter().find(|(_, l)| !(0.0..=1.0).contains(*l)) {
            return Err(Error::Contract(format!("loss {l} of arm {j} outside [0, 1]")));
        }
        Ok(())
    }
}

/// `P_i = Σ_{j ∈ N^in(i)} p_j` for every arm.
pub fn observation_probabilities(g: &FeedbackGraph, p: &[f64]) -> Vec<f64> {
    (0..g.n())
        .map(|i| g.in_neighborhood(i).iter().map(|j| p[j]).sum())
        .collect()
}

/// Importance-weighted estimates `ℓ̂_i = ℓ_i·1{i observed}/P_i`.
///
/// An observed arm with `P_i = 0` cannot happen when `p` is the distribution
/// that was sampled, so it is reported as an invariant violation.
pub fn loss_estimates(g: &FeedbackGraph, fb: &Feedback, p: &[f64]) -> Result<Vec<f64>> {
    let mut est = vec![0.0; g.n()];
    for (&i, &loss) in &fb.observed {
        let obs: f64 = g.in_neighborhood(i).iter().map(|j| p[j]).sum();
        if !(obs > 0.0) {
            return Err(Error::Invariant(format!(
                "arm {i} was observed but its observation probability is {obs}"
            )));
        }
        est[i] = loss / obs;
    }
    Ok(est)
}

/// Round protocol shared by all policies.
pub trait Policy {
    fn kind(&self) -> PolicyKind;

    /// Distribution `p_t` for the coming round.
    fn distribution(&mut self) -> Result<ActionDistribution>;

    /// Consumes the feedback of the round played with `p_used`.
    fn update(&mut self, fb: &Feedback, p_used: &ActionDistribution) -> Result<()>;
}

/// Policy identifiers accepted by configs and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "exp3ex")]
    Exp3Ex,
    #[serde(rename = "exp3set")]
    Exp3Set,
    #[serde(rename = "etc-hub")]
    EtcHub,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::Exp3Ex, PolicyKind::Exp3Set, PolicyKind::EtcHub];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Exp3Ex => "exp3ex",
            PolicyKind::Exp3Set => "exp3set",
            PolicyKind::EtcHub => "etc-hub",
        }
    }

    /// Builds a fresh policy for horizon `horizon`. `proxy_cache` only
    /// affects Exp3-EX; the ETC baseline uses the first vertex observing
    /// every arm.
    pub fn build<'g>(
        self,
        g: &'g FeedbackGraph,
        horizon: u64,
        proxy_cache: bool,
    ) -> Result<Box<dyn Policy + Send + 'g>> {
        Ok(match self {
            PolicyKind::Exp3Ex => Box::new(Exp3Ex::new(g, horizon, proxy_cache)?),
            PolicyKind::Exp3Set => Box::new(Exp3Set::new(g, horizon)?),
            PolicyKind::EtcHub => {
                let hub = g.hubs().first().copied().ok_or_else(|| {
                    Error::Parameter("etc-hub needs a vertex observing every arm".into())
                })?;
                Box::new(EtcHub::new(g, horizon, hub)?)
            }
        })
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown policy '{s}' (expected exp3ex, exp3set or etc-hub)"
                ))
            })
    }
}

fn check_horizon(horizon: u64) -> Result<()> {
    if horizon == 0 {
        return Err(Error::Parameter("horizon T must be at least 1".into()));
    }
    Ok(())
}

/// `q_i ∝ (1/N)·exp(-η L̂_i)`, shifted by `min_i ηL̂_i` before exponentiation.
fn exponential_weights(eta: f64, cum_loss: &[f64]) -> Vec<f64> {
    let n = cum_loss.len() as f64;
    let shift = cum_loss
        .iter()
        .map(|&l| eta * l)
        .fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = cum_loss
        .iter()
        .map(|&l| (-(eta * l - shift)).exp() / n)
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_star;

    #[test]
    fn estimator_example() {
        let g = FeedbackGraph::build(3, [(0, 1)]).unwrap();
        let p = [0.5, 0.3, 0.2];
        assert_eq!(observation_probabilities(&g, &p)[1], 0.8);
        let fb = Feedback::from_losses(&g, 0, &[0.1, 0.6, 0.9]);
        let est = loss_estimates(&g, &fb, &p).unwrap();
        assert!((est[1] - 0.75).abs() < 1e-15);
        assert_eq!(est[2], 0.0);
    }

    #[test]
    fn zero_observation_probability_is_loud() {
        let g = FeedbackGraph::build(2, []).unwrap();
        let fb = Feedback::from_losses(&g, 1, &[0.0, 0.5]);
        assert!(matches!(
            loss_estimates(&g, &fb, &[1.0, 0.0]),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn feedback_validation() {
        let g = gen_star(3).unwrap();
        let fb = Feedback::from_losses(&g, 2, &[0.1, 0.2, 0.3]);
        assert_eq!(fb.observed.len(), 3);
        assert!(fb.validate(&g).is_ok());
        let mut bad = fb.clone();
        bad.observed.remove(&0);
        assert!(bad.validate(&g).is_err());
        let mut bad = fb;
        bad.observed.insert(0, 1.5);
        assert!(bad.validate(&g).is_err());
    }

    #[test]
    fn policy_ids_round_trip() {
        for k in PolicyKind::ALL {
            assert_eq!(k.as_str().parse::<PolicyKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{k}\""));
        }
        assert!(matches!("exp4".parse::<PolicyKind>(), Err(Error::Config(_))));
    }

    #[test]
    fn weights_survive_large_losses() {
        let q = exponential_weights(1.0, &[1e6, 1e6 + 1.0, 1e6]);
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(q[0] > q[1] && q[0] == q[2]);
    }
}
