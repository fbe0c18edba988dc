//! Experiment orchestration: build the graph and loss source from a JSON
//! config, run every `(policy, seed)` pair, and collect regret curves.
//!
//! Runs are independent and fan out over a rayon pool; results are merged
//! in run-index order, so outputs do not depend on the number of workers.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::{analyze, AnalysisMode, ComplexityReport};
use crate::environments::{
    gen_bernoulli, gen_fixed, gen_hard_instance, load_loss_csv, HardInstanceSpec, LossMatrix,
    RegretMode, RegretTracker,
};
use crate::error::{Error, Result};
use crate::graph::{gen_edgeless, gen_random, gen_star, gen_union_of_stars, FeedbackGraph, VertexSet};
use crate::policies::{Feedback, PolicyKind};
use crate::rng::Stream;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "GRAPHBANDIT_THREADS";

const ENV_STREAM: u64 = 0x65_6e76;
const SAMPLE_STREAM: u64 = 0x7361_6d70;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    Star(usize),
    Edgeless(usize),
    /// `[leaves, copies]` pairs.
    UnionOfStars(Vec<(usize, usize)>),
    Random { n: usize, p: f64, seed: u64 },
    /// Graph JSON file.
    File(PathBuf),
}

impl GraphSource {
    pub fn build(&self) -> Result<FeedbackGraph> {
        match self {
            GraphSource::Star(n) => gen_star(*n),
            GraphSource::Edgeless(n) => gen_edgeless(*n),
            GraphSource::UnionOfStars(sizes) => gen_union_of_stars(sizes),
            GraphSource::Random { n, p, seed } => gen_random(*n, *p, *seed),
            GraphSource::File(path) => FeedbackGraph::load(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvironmentSpec {
    /// Near-optimal-set instance; `near_optimal` defaults to every arm.
    Hard {
        #[serde(default)]
        near_optimal: Option<Vec<usize>>,
        j_star: usize,
        gap: f64,
    },
    /// Independent Bernoulli losses.
    Bernoulli { means: Vec<f64> },
    /// Inline `T × N` matrix.
    Fixed(Vec<Vec<f64>>),
    /// Loss CSV file.
    Csv(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegretChoice {
    /// Pseudo-regret for stochastic sources, realized regret for matrices.
    #[default]
    Auto,
    Realized,
    Pseudo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexityChoice {
    Auto,
    Exact,
    Approximate,
}

/// One experiment, read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub environment: EnvironmentSpec,
    pub policies: Vec<PolicyKind>,
    /// Defaults to the number of rows for matrix sources.
    #[serde(default)]
    pub horizon: Option<u64>,
    pub num_seeds: usize,
    pub master_seed: u64,
    /// Per-run CSV path; a `.summary.csv` sibling gets the aggregates.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub proxy_cache: bool,
    #[serde(default)]
    pub regret: RegretChoice,
    /// When set, the graph is analyzed for the horizon as well.
    #[serde(default)]
    pub complexity: Option<ComplexityChoice>,
    /// Worker count; falls back to `GRAPHBANDIT_THREADS`, then rayon's default.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config; relative paths inside it resolve against its folder.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let GraphSource::File(p) = &mut self.graph {
            fix(p);
        }
        if let EnvironmentSpec::Csv(p) = &mut self.environment {
            fix(p);
        }
        if let Some(p) = &mut self.output {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.policies.is_empty() {
            return Err(Error::Config("at least one policy is required".into()));
        }
        if self.num_seeds == 0 {
            return Err(Error::Config("num_seeds must be at least 1".into()));
        }
        if self.horizon == Some(0) {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}

/// Cumulative regret of one `(policy, seed)` run, one entry per round.
#[derive(Debug, Clone, PartialEq)]
pub struct RunCurve {
    pub policy: PolicyKind,
    pub seed: usize,
    pub cum_regret: Vec<f64>,
}

/// Per-round mean and standard error over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub policy: PolicyKind,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub horizon: u64,
    pub mode: RegretMode,
    /// Ordered by policy (config order), then seed.
    pub runs: Vec<RunCurve>,
    pub aggregates: Vec<Aggregate>,
    pub complexity: Option<ComplexityReport>,
}

impl RegretCurve {
    pub fn aggregate(&self, policy: PolicyKind) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.policy == policy)
    }

    /// Mean cumulative regret at the last round.
    pub fn final_mean(&self, policy: PolicyKind) -> Option<f64> {
        self.aggregate(policy).and_then(|a| a.mean.last().copied())
    }

    pub fn final_stderr(&self, policy: PolicyKind) -> Option<f64> {
        self.aggregate(policy).and_then(|a| a.stderr.last().copied())
    }

    /// `policy,seed,t,cum_regret` with `t` starting at 1.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["policy", "seed", "t", "cum_regret"])?;
        for run in &self.runs {
            let policy = run.policy.as_str();
            let seed = run.seed.to_string();
            for (t, r) in run.cum_regret.iter().enumerate() {
                w.write_record([policy, &seed, &(t + 1).to_string(), &r.to_string()])?;
            }
        }
        w.flush().map_err(|source| Error::Io {
            path: "<csv output>".into(),
            source,
        })?;
        Ok(())
    }

    /// `policy,t,mean,stderr`.
    pub fn write_summary_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["policy", "t", "mean", "stderr"])?;
        for agg in &self.aggregates {
            for (t, (m, s)) in agg.mean.iter().zip(&agg.stderr).enumerate() {
                w.write_record([
                    agg.policy.as_str(),
                    &(t + 1).to_string(),
                    &m.to_string(),
                    &s.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|source| Error::Io {
            path: "<csv output>".into(),
            source,
        })?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Sibling path for the aggregate CSV: `out.csv` → `out.summary.csv`.
pub fn summary_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    output.with_file_name(format!("{stem}.summary.csv"))
}

/// Writes the per-run CSV to `path` and the aggregates next to it.
pub fn write_outputs(curve: &RegretCurve, path: &Path) -> Result<()> {
    let create = |p: &Path| {
        std::fs::File::create(p).map_err(|source| Error::Io {
            path: p.display().to_string(),
            source,
        })
    };
    curve.write_csv(std::io::BufWriter::new(create(path)?))?;
    let summary = summary_path(path);
    curve.write_summary_csv(std::io::BufWriter::new(create(&summary)?))?;
    Ok(())
}

/// Seed of the loss source for seed index `seed`; shared by all policies.
pub fn environment_seed(master_seed: u64, seed: usize) -> u64 {
    Stream::new(master_seed).split(ENV_STREAM).split(seed as u64).key()
}

/// Stream of sampling uniforms for one run (read at the round index).
pub fn sampling_stream(master_seed: u64, run: usize) -> Stream {
    Stream::new(master_seed).split(SAMPLE_STREAM).split(run as u64)
}

fn build_losses(
    cfg: &ExperimentConfig,
    g: &FeedbackGraph,
    horizon: u64,
    seed: usize,
) -> Result<LossMatrix> {
    let env_seed = environment_seed(cfg.master_seed, seed);
    match &cfg.environment {
        EnvironmentSpec::Hard {
            near_optimal,
            j_star,
            gap,
        } => {
            let set = match near_optimal {
                Some(v) => VertexSet::from_indices(g.n(), v.iter().copied())?,
                None => g.vertices(),
            };
            let spec = HardInstanceSpec {
                near_optimal: set,
                j_star: *j_star,
                gap: *gap,
                seed: env_seed,
            };
            gen_hard_instance(g, &spec, horizon)
        }
        EnvironmentSpec::Bernoulli { means } => gen_bernoulli(means.clone(), horizon, env_seed),
        EnvironmentSpec::Fixed(rows) => gen_fixed(rows.clone()),
        EnvironmentSpec::Csv(path) => load_loss_csv(path),
    }
}

fn regret_mode(choice: RegretChoice, losses: &LossMatrix) -> Result<RegretMode> {
    match (choice, losses.means()) {
        (RegretChoice::Realized, _) | (RegretChoice::Auto, None) => Ok(RegretMode::Realized),
        (RegretChoice::Pseudo, Some(m)) | (RegretChoice::Auto, Some(m)) => {
            Ok(RegretMode::PseudoWithMeans(m.to_vec()))
        }
        (RegretChoice::Pseudo, None) => Err(Error::Config(
            "pseudo-regret needs a stochastic environment with known means".into(),
        )),
    }
}

/// Plays one policy against one loss source.
pub fn simulate_run(
    g: &FeedbackGraph,
    losses: &LossMatrix,
    policy: PolicyKind,
    horizon: u64,
    proxy_cache: bool,
    sampling: Stream,
    mode: RegretMode,
) -> Result<Vec<f64>> {
    if losses.n() != g.n() {
        return Err(Error::Config(format!(
            "loss source has {} arms, graph has {}",
            losses.n(),
            g.n()
        )));
    }
    if horizon > losses.horizon() {
        return Err(Error::Config(format!(
            "horizon {horizon} exceeds the {} rounds of the loss source",
            losses.horizon()
        )));
    }
    let mut learner = policy.build(g, horizon, proxy_cache)?;
    let mut tracker = RegretTracker::new(g.n(), mode)?;
    let mut row = Vec::with_capacity(g.n());
    let mut curve = Vec::with_capacity(horizon as usize);
    for t in 0..horizon {
        let p = learner.distribution()?;
        let chosen = p.sample(sampling.uniform_at(t));
        losses.fill_row(t, &mut row);
        learner.update(&Feedback::from_losses(g, chosen, &row), &p)?;
        curve.push(tracker.push(chosen, &row)?);
    }
    Ok(curve)
}

fn worker_count(cfg: &ExperimentConfig) -> Result<Option<usize>> {
    if let Some(n) = cfg.threads {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs every `(policy, seed)` pair of `cfg`.
///
/// Loss sources depend only on `(master_seed, seed index)`; sampling draws
/// on `(master_seed, run index, round)` with run index
/// `policy_index · num_seeds + seed`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RegretCurve> {
    cfg.validate()?;
    let g = cfg.graph.build()?;
    // Seed 0's loss source; it also tells whether means are known.
    let probe = build_losses(cfg, &g, cfg.horizon.unwrap_or(1), 0)?;
    let horizon = match (cfg.horizon, probe.is_stochastic()) {
        (Some(t), _) => t,
        (None, false) => probe.horizon(),
        (None, true) => {
            return Err(Error::Config("horizon is required for stochastic environments".into()))
        }
    };
    let mode = regret_mode(cfg.regret, &probe)?;

    let runs: Vec<(PolicyKind, usize, usize)> = cfg
        .policies
        .iter()
        .enumerate()
        .flat_map(|(pi, &policy)| {
            (0..cfg.num_seeds).map(move |seed| (policy, seed, pi * cfg.num_seeds + seed))
        })
        .collect();
    let run_one = |&(policy, seed, run): &(PolicyKind, usize, usize)| -> Result<RunCurve> {
        let losses = if seed == 0 {
            probe.clone()
        } else {
            build_losses(cfg, &g, horizon, seed)?
        };
        let mode = regret_mode(cfg.regret, &losses)?;
        let cum_regret = simulate_run(
            &g,
            &losses,
            policy,
            horizon,
            cfg.proxy_cache,
            sampling_stream(cfg.master_seed, run),
            mode,
        )?;
        Ok(RunCurve {
            policy,
            seed,
            cum_regret,
        })
    };
    let results: Vec<Result<RunCurve>> = match worker_count(cfg)? {
        Some(1) => runs.iter().map(run_one).collect(),
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| runs.par_iter().map(run_one).collect()),
        None => runs.par_iter().map(run_one).collect(),
    };
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let aggregates = aggregate(&cfg.policies, &runs, horizon as usize);
    let complexity = match cfg.complexity {
        None => None,
        Some(choice) => Some(analyze(
            &g,
            horizon,
            match choice {
                ComplexityChoice::Auto => AnalysisMode::Auto,
                ComplexityChoice::Exact => AnalysisMode::Exact,
                ComplexityChoice::Approximate => AnalysisMode::Approximate,
            },
        )?),
    };
    Ok(RegretCurve {
        horizon,
        mode,
        runs,
        aggregates,
        complexity,
    })
}

fn aggregate(policies: &[PolicyKind], runs: &[RunCurve], horizon: usize) -> Vec<Aggregate> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    for &policy in policies {
        if seen.contains(&policy) {
            continue;
        }
        seen.push(policy);
        let curves: Vec<&[f64]> = runs
            .iter()
            .filter(|r| r.policy == policy)
            .map(|r| r.cum_regret.as_slice())
            .collect();
        let k = curves.len() as f64;
        let mut mean = Vec::with_capacity(horizon);
        let mut stderr = Vec::with_capacity(horizon);
        for t in 0..horizon {
            let m = curves.iter().map(|c| c[t]).sum::<f64>() / k;
            let se = if curves.len() > 1 {
                let var = curves.iter().map(|c| (c[t] - m).powi(2)).sum::<f64>() / (k - 1.0);
                (var / k).sqrt()
            } else {
                0.0
            };
            mean.push(m);
            stderr.push(se);
        }
        out.push(Aggregate {
            policy,
            mean,
            stderr,
        });
    }
    out
}

/// Parameter swept by [`run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Horizon,
    /// The hard instance's gap `Δ`.
    Gap,
}

/// Final-round aggregate of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub policy: PolicyKind,
    pub mean: f64,
    pub stderr: f64,
}

/// Reruns `base` for every value of `parameter`.
pub fn run_sweep(
    base: &ExperimentConfig,
    parameter: SweepParameter,
    values: &[f64],
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &value in values {
        let mut cfg = base.clone();
        cfg.output = None;
        cfg.complexity = None;
        match parameter {
            SweepParameter::Horizon => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::Config(format!("horizon {value} is not a positive integer")));
                }
                cfg.horizon = Some(value as u64);
            }
            SweepParameter::Gap => match &mut cfg.environment {
                EnvironmentSpec::Hard { gap, .. } => *gap = value,
                _ => {
                    return Err(Error::Config(
                        "a gap sweep needs the hard environment".into(),
                    ))
                }
            },
        }
        let curve = run_experiment(&cfg)?;
        for agg in &curve.aggregates {
            rows.push(SweepRow {
                value,
                policy: agg.policy,
                mean: *agg.mean.last().unwrap_or(&0.0),
                stderr: *agg.stderr.last().unwrap_or(&0.0),
            });
        }
    }
    Ok(rows)
}

/// `value,policy,mean,stderr`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["value", "policy", "mean", "stderr"])?;
    for r in rows {
        w.write_record([
            r.value.to_string(),
            r.policy.to_string(),
            r.mean.to_string(),
            r.stderr.to_string(),
        ])?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<csv output>".into(),
        source,
    })?;
    Ok(())
}
