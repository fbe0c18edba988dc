use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphbandit::complexity::{analyze, AnalysisMode};
use graphbandit::graph::{gen_edgeless, gen_random, gen_star, gen_union_of_stars};
use graphbandit::harness::{
    run_experiment, run_sweep, write_outputs, write_sweep_csv, ExperimentConfig, SweepParameter,
};
use graphbandit::{Error, FeedbackGraph};

/// Bandits with feedback graphs: simulate policies and analyze graphs.
#[derive(Parser)]
#[command(name = "graphbandit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path; without any, CSV goes to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Recompute proxy splits every round.
        #[arg(long)]
        no_cache: bool,
    },
    /// Report α, δ, Q*, R* and the regime of a graph.
    Complexity {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "T")]
        horizon: u64,
        /// Skip enumeration and use the greedy estimates.
        #[arg(long, conflicts_with = "exact")]
        approx: bool,
        /// Enumerate even if it fails the size guard.
        #[arg(long)]
        exact: bool,
    },
    /// Graph utilities.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
    /// Rerun a config over a grid of horizons or gaps.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        over: SweepOver,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Print a generated graph as JSON.
    Gen(GenArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "kind")]
struct GenKind {
    /// Star with the hub as the last vertex.
    #[arg(long, value_name = "N")]
    star: Option<usize>,
    #[arg(long, value_name = "N")]
    edgeless: Option<usize>,
    /// Comma-separated `LEAVESxCOPIES` blocks, e.g. `8x2,3x1`.
    #[arg(long, value_name = "SPEC")]
    union_of_stars: Option<String>,
    /// Directed Erdős–Rényi graph on N vertices.
    #[arg(long, value_name = "N")]
    random: Option<usize>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    kind: GenKind,
    /// Edge probability for --random.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Seed for --random.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepOver {
    Horizon,
    Gap,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for unreadable or malformed inputs, 1 for failures during a run.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. }
        | Error::Json(_)
        | Error::Csv(_)
        | Error::Config(_)
        | Error::Construction(_)
        | Error::Parameter(_)
        | Error::SizeGuard { .. } => 2,
        _ => 1,
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Simulate {
            config,
            output,
            threads,
            no_cache,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if threads.is_some() {
                cfg.threads = threads;
            }
            if no_cache {
                cfg.proxy_cache = false;
            }
            if output.is_some() {
                cfg.output = output;
            }
            cfg.validate()?;
            let curve = run_experiment(&cfg)?;
            match &cfg.output {
                Some(path) => {
                    write_outputs(&curve, path)?;
                    if let Some(report) = &curve.complexity {
                        let side = path.with_extension("complexity.json");
                        write_text(&side, &serde_json::to_string_pretty(report)?)?;
                    }
                }
                None => curve.write_csv(io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Complexity {
            graph,
            horizon,
            approx,
            exact,
        } => {
            let g = FeedbackGraph::load(&graph)?;
            let mode = if approx {
                AnalysisMode::Approximate
            } else if exact {
                AnalysisMode::Exact
            } else {
                AnalysisMode::Auto
            };
            let report = analyze(&g, horizon, mode)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::Graph {
            command: GraphCommand::Gen(args),
        } => {
            let k = &args.kind;
            let g = if let Some(n) = k.star {
                gen_star(n)?
            } else if let Some(n) = k.edgeless {
                gen_edgeless(n)?
            } else if let Some(spec) = &k.union_of_stars {
                gen_union_of_stars(&parse_stars(spec)?)?
            } else if let Some(n) = k.random {
                gen_random(n, args.p, args.seed)?
            } else {
                unreachable!("clap requires one generator")
            };
            match &args.output {
                Some(path) => g.save(path),
                None => {
                    println!("{}", g.to_json());
                    Ok(())
                }
            }
        }
        Command::Sweep {
            config,
            over,
            values,
            output,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let parameter = match over {
                SweepOver::Horizon => SweepParameter::Horizon,
                SweepOver::Gap => SweepParameter::Gap,
            };
            let rows = run_sweep(&cfg, parameter, &values)?;
            match &output {
                Some(path) => {
                    let file = std::fs::File::create(path).map_err(|source| Error::Io {
                        path: path.display().to_string(),
                        source,
                    })?;
                    write_sweep_csv(&rows, io::BufWriter::new(file))
                }
                None => write_sweep_csv(&rows, io::stdout().lock()),
            }
        }
    }
}

fn parse_stars(spec: &str) -> Result<Vec<(usize, usize)>, Error> {
    spec.split(',')
        .map(|block| {
            let (leaves, copies) = block.trim().split_once('x').unwrap_or((block.trim(), "1"));
            match (leaves.parse(), copies.parse()) {
                (Ok(l), Ok(c)) => Ok((l, c)),
                _ => Err(Error::Parameter(format!(
                    "bad star block '{block}' (expected LEAVESxCOPIES)"
                ))),
            }
        })
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = std::fs::File::create(path).map_err(io_err)?;
    writeln!(f, "{text}").map_err(io_err)
}
