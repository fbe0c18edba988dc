//! Oblivious loss sources and regret accounting.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{FeedbackGraph, VertexSet};
use crate::rng::Stream;

/// A `T × N` loss table in `[0, 1]`, either stored or regenerated on demand
/// from Bernoulli means and a seed.
#[derive(Debug, Clone, PartialEq)]
pub enum LossMatrix {
    Fixed { rows: Vec<Vec<f64>> },
    Bernoulli { means: Vec<f64>, horizon: u64, stream: Stream },
}

impl LossMatrix {
    pub fn horizon(&self) -> u64 {
        match self {
            LossMatrix::Fixed { rows } => rows.len() as u64,
            LossMatrix::Bernoulli { horizon, .. } => *horizon,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            LossMatrix::Fixed { rows } => rows[0].len(),
            LossMatrix::Bernoulli { means, .. } => means.len(),
        }
    }

    /// Loss of arm `i` at round `t` (0-based).
    pub fn loss(&self, t: u64, i: usize) -> f64 {
        match self {
            LossMatrix::Fixed { rows } => rows[t as usize][i],
            LossMatrix::Bernoulli { means, stream, .. } => {
                bernoulli_loss(stream.split(t), i, means[i])
            }
        }
    }

    /// Writes row `t` into `out` (resized to `N`).
    pub fn fill_row(&self, t: u64, out: &mut Vec<f64>) {
        out.clear();
        match self {
            LossMatrix::Fixed { rows } => out.extend_from_slice(&rows[t as usize]),
            LossMatrix::Bernoulli { means, stream, .. } => {
                let row_stream = stream.split(t);
                out.extend(
                    means
                        .iter()
                        .enumerate()
                        .map(|(i, &m)| bernoulli_loss(row_stream, i, m)),
                );
            }
        }
    }

    pub fn row(&self, t: u64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n());
        self.fill_row(t, &mut out);
        out
    }

    /// Expected losses, known for stochastic sources only.
    pub fn means(&self) -> Option<&[f64]> {
        match self {
            LossMatrix::Fixed { .. } => None,
            LossMatrix::Bernoulli { means, .. } => Some(means),
        }
    }

    pub fn is_stochastic(&self) -> bool {
        self.means().is_some()
    }
}

#[inline]
fn bernoulli_loss(row: Stream, i: usize, mean: f64) -> f64 {
    if row.uniform_at(i as u64) < mean {
        1.0
    } else {
        0.0
    }
}

/// Parameters of the near-optimal-set instance: `j_star` has mean loss
/// `1/2 - Δ`, the rest of `I` has `1/2`, everything outside `I` has `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HardInstanceSpec {
    pub near_optimal: VertexSet,
    pub j_star: usize,
    pub gap: f64,
    pub seed: u64,
}

impl HardInstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.gap >= 0.0 && self.gap <= 0.5) {
            return Err(Error::Parameter(format!("gap {} not in [0, 1/2]", self.gap)));
        }
        if !self.near_optimal.contains(self.j_star) {
            return Err(Error::Parameter(format!(
                "optimal arm {} is not in the near-optimal set {:?}",
                self.j_star, self.near_optimal
            )));
        }
        Ok(())
    }

    /// Mean loss of every arm.
    pub fn means(&self) -> Vec<f64> {
        (0..self.near_optimal.universe())
            .map(|i| {
                if i == self.j_star {
                    0.5 - self.gap
                } else if self.near_optimal.contains(i) {
                    0.5
                } else {
                    1.0
                }
            })
            .collect()
    }
}

/// Bernoulli losses with the means of [`HardInstanceSpec::means`]; loss
/// `(t, i)` is a pure function of `(seed, t, i)`.
pub fn gen_hard_instance(
    g: &FeedbackGraph,
    spec: &HardInstanceSpec,
    horizon: u64,
) -> Result<LossMatrix> {
    spec.validate()?;
    if spec.near_optimal.universe() != g.n() {
        return Err(Error::Parameter(format!(
            "near-optimal set over {} arms for a graph on {}",
            spec.near_optimal.universe(),
            g.n()
        )));
    }
    gen_bernoulli(spec.means(), horizon, spec.seed)
}

/// Independent Bernoulli losses with the given means.
pub fn gen_bernoulli(means: Vec<f64>, horizon: u64, seed: u64) -> Result<LossMatrix> {
    if horizon == 0 || means.is_empty() {
        return Err(Error::Parameter("loss source needs T >= 1 and N >= 1".into()));
    }
    if let Some(m) = means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
        return Err(Error::Parameter(format!("mean loss {m} outside [0, 1]")));
    }
    Ok(LossMatrix::Bernoulli {
        means,
        horizon,
        stream: Stream::new(seed).split(0x6c6f_7373),
    })
}

/// A stored matrix; rows are rounds, columns arms.
pub fn gen_fixed(rows: Vec<Vec<f64>>) -> Result<LossMatrix> {
    let n = rows.first().map_or(0, Vec::len);
    if n == 0 {
        return Err(Error::Parameter("loss matrix needs at least one row and column".into()));
    }
    for (t, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Parameter(format!(
                "row {t} has {} entries, expected {n}",
                row.len()
            )));
        }
        if let Some((i, l)) = row.iter().enumerate().find(|(_, l)| !(0.0..=1.0).contains(*l)) {
            return Err(Error::Parameter(format!(
                "loss {l} at round {t}, arm {i} outside [0, 1]"
            )));
        }
    }
    Ok(LossMatrix::Fixed { rows })
}

/// Reads a loss matrix from CSV (one row per round). A first line that does
/// not parse as numbers is taken as a header.
pub fn read_loss_csv<R: Read>(reader: R) -> Result<LossMatrix> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (line, record) in csv.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(Error::Parameter(format!("line {}: {e}", line + 1)));
            }
        }
    }
    gen_fixed(rows)
}

pub fn load_loss_csv(path: impl AsRef<Path>) -> Result<LossMatrix> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_loss_csv(file)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegretMode {
    /// `Σ_t ℓ_{t,i_t} - min_k Σ_t ℓ_{t,k}`.
    Realized,
    /// `Σ_t μ_{i_t} - T·min_k μ_k`.
    PseudoWithMeans(Vec<f64>),
}

/// Running cumulative regret.
#[derive(Debug, Clone)]
pub struct RegretTracker {
    mode: RegretMode,
    arm_totals: Vec<f64>,
    learner: f64,
    best_mean: f64,
    rounds: u64,
}

impl RegretTracker {
    pub fn new(n: usize, mode: RegretMode) -> Result<Self> {
        let best_mean = match &mode {
            RegretMode::Realized => 0.0,
            RegretMode::PseudoWithMeans(means) => {
                if means.len() != n {
                    return Err(Error::Parameter(format!(
                        "{} means for {n} arms",
                        means.len()
                    )));
                }
                means.iter().copied().fold(f64::INFINITY, f64::min)
            }
        };
        Ok(Self {
            mode,
            arm_totals: vec![0.0; n],
            learner: 0.0,
            best_mean,
            rounds: 0,
        })
    }

    /// Records one round and returns the cumulative regret so far.
    pub fn push(&mut self, chosen: usize, losses: &[f64]) -> Result<f64> {
        let n = self.arm_totals.len();
        if chosen >= n || losses.len() != n {
            return Err(Error::Parameter(format!(
                "round with arm {chosen} and {} losses for {n} arms",
                losses.len()
            )));
        }
        self.rounds += 1;
        match &self.mode {
            RegretMode::Realized => {
                self.learner += losses[chosen];
                for (total, l) in self.arm_totals.iter_mut().zip(losses) {
                    *total += l;
                }
            }
            RegretMode::PseudoWithMeans(means) => self.learner += means[chosen],
        }
        Ok(self.current())
    }

    pub fn current(&self) -> f64 {
        match self.mode {
            RegretMode::Realized => {
                let best = self.arm_totals.iter().copied().fold(f64::INFINITY, f64::min);
                self.learner - best
            }
            RegretMode::PseudoWithMeans(_) => {
                self.learner - self.rounds as f64 * self.best_mean
            }
        }
    }
}

/// Regret of a played trace of `(i_t, ℓ_t)`.
pub fn compute_regret(trace: &[(usize, Vec<f64>)], mode: RegretMode) -> Result<f64> {
    let Some((_, first)) = trace.first() else {
        return Ok(0.0);
    };
    let mut tracker = RegretTracker::new(first.len(), mode)?;
    for (chosen, losses) in trace {
        tracker.push(*chosen, losses)?;
    }
    Ok(tracker.current())
}
