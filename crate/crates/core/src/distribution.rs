use crate::error::{Error, Result};
use crate::rng::sample_index;

/// Tolerance on the total mass of a full distribution.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    /// Sums to one.
    Full,
    /// Nonnegative with total mass at most one (e.g. an LP policy `π`).
    Sub,
}

/// Probability vector over actions.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    probs: Vec<f64>,
    kind: DistributionKind,
}

impl ActionDistribution {
    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
            kind: DistributionKind::Full,
        }
    }

    pub fn point(n: usize, i: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[i] = 1.0;
        Self {
            probs,
            kind: DistributionKind::Full,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            probs: vec![0.0; n],
            kind: DistributionKind::Sub,
        }
    }

    /// A full distribution; the mass must be one within [`MASS_TOLERANCE`].
    pub fn full(probs: Vec<f64>) -> Result<Self> {
        check_entries(&probs)?;
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Contract(format!(
                "distribution mass {total} differs from 1"
            )));
        }
        Ok(Self {
            probs,
            kind: DistributionKind::Full,
        })
    }

    pub fn sub(probs: Vec<f64>) -> Result<Self> {
        check_entries(&probs)?;
        let total: f64 = probs.iter().sum();
        if total > 1.0 + MASS_TOLERANCE {
            return Err(Error::Contract(format!(
                "sub-distribution mass {total} exceeds 1"
            )));
        }
        Ok(Self {
            probs,
            kind: DistributionKind::Sub,
        })
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Inverse-CDF draw with the uniform `u ∈ [0, 1)`.
    pub fn sample(&self, u: f64) -> usize {
        sample_index(&self.probs, u)
    }
}

impl std::ops::Index<usize> for ActionDistribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

fn check_entries(probs: &[f64]) -> Result<()> {
    if let Some((i, p)) = probs
        .iter()
        .enumerate()
        .find(|(_, p)| !p.is_finite() || **p < 0.0)
    {
        return Err(Error::Contract(format!("probability {p} at index {i}")));
    }
    Ok(())
}
