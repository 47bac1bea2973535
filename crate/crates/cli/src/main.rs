//! `heatgraph`: heat kernels, stochastic completeness and spectral bounds on
//! lazily generated infinite graphs.

mod args;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use heatgraph::compare::CompareMode;
use heatgraph::{Backend, ComputeOptions};

use args::{parse_positive, parse_radii, parse_times, GraphSource};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("bad graph spec in {origin}: {source}")]
    Spec { origin: String, source: heatgraph::Error },
    #[error("{0}")]
    Usage(String),
    /// An invariant check failed; the report has been written.
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Core(#[from] heatgraph::Error),
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Inconclusive,
}

// Aliases keep clap from treating the parsed lists as repeated arguments.
type Radii = Vec<usize>;
type Times = Vec<f64>;

#[derive(Parser, Debug)]
#[command(name = "heatgraph", version, about)]
#[command(after_help = "Radii are written a:b or a:b:step (inclusive); time grids are comma lists.\n\
Exit codes: 0 success, 1 error, 2 inconclusive (resource limit or undecided verdict).")]
struct Cli {
    /// Vertex cap for materialized balls.
    #[arg(long, global = true, env = "HEATGRAPH_CAPACITY", default_value_t = heatgraph::graph::DEFAULT_CAPACITY)]
    capacity: usize,
    /// Largest matrix handed to the dense solvers.
    #[arg(long, global = true, default_value_t = heatgraph::options::DEFAULT_DENSE_LIMIT)]
    dense_limit: usize,
    /// How root-centered quantities are computed.
    #[arg(long, global = true, value_enum, default_value_t = BackendArg::Auto)]
    backend: BackendArg,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    Auto,
    Dense,
    Radial,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Comp1,
    Comp2,
    Generalized,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exhaustion trace of p_t(x, y) and the mass of p_t(x, .) over growing balls.
    Heat {
        #[command(flatten)]
        source: GraphSource,
        /// Times, comma separated.
        #[arg(long = "t", value_parser = parse_times, default_value = "1")]
        times: Times,
        #[arg(long, value_parser = parse_radii, default_value = "1:12")]
        radii: Radii,
        /// First vertex: `root` or an id such as /0/1, ray1:3, 7.
        #[arg(long, default_value = "root")]
        probe: String,
        /// Second vertex; defaults to the probe.
        #[arg(long)]
        target: Option<String>,
        /// Stop once consecutive values differ by less than this.
        #[arg(long, value_parser = parse_positive, default_value = "1e-8")]
        tol: f64,
    },
    /// Completeness verdict from symbolic criteria and the numeric diagnostic.
    Diagnose {
        #[command(flatten)]
        source: GraphSource,
        /// Negative spectral parameter of the diagnostic.
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, value_parser = parse_radii, default_value = "1:60")]
        radii: Radii,
        #[arg(long, value_parser = parse_positive, default_value = "1e-8")]
        tol: f64,
        /// Skip the numeric diagnostic when a symbolic criterion decides.
        #[arg(long)]
        symbolic_only: bool,
    },
    /// Bottom of the spectrum by exhaustion, with geometric bounds and Cheeger ratios.
    Spectrum {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, value_parser = parse_radii, default_value = "1:10")]
        radii: Radii,
        #[arg(long, value_parser = parse_positive, default_value = "1e-9")]
        tol: f64,
        /// Also trace λ₀ of annuli between these inner radii and --outer.
        #[arg(long, value_parser = parse_radii, requires = "outer")]
        exterior: Option<Radii>,
        /// Outer radius of the annuli.
        #[arg(long)]
        outer: Option<usize>,
        /// Also build positive λ-harmonic witnesses for this λ.
        #[arg(long, allow_hyphen_values = true)]
        witness_lambda: Option<f64>,
    },
    /// Compare a graph's kernel from its root with a model tree's radial kernel.
    Compare {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Branching law of the model tree as JSON; root_valence defaults to
        /// the root valence of the graph.
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 6)]
        radius: usize,
        #[arg(long = "t", value_parser = parse_times, default_value = "0.1,0.5,1,2,5")]
        times: Times,
    },
    /// Check every invariant on one ball of the graph and report violations.
    Verify {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 3)]
        radius: usize,
        /// Random function pairs for the Green identity and Rayleigh checks.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let opts = ComputeOptions {
        capacity: cli.capacity,
        dense_limit: cli.dense_limit,
        backend: match cli.backend {
            BackendArg::Auto => Backend::Auto,
            BackendArg::Dense => Backend::Dense,
            BackendArg::Radial => Backend::Radial,
        },
    };
    let out = cli.out.as_path();
    match cli.command {
        Command::Heat {
            source,
            times,
            radii,
            probe,
            target,
            tol,
        } => commands::heat(&source, &times, &radii, &probe, target.as_deref(), tol, &opts, out),
        Command::Diagnose {
            source,
            lambda,
            radii,
            tol,
            symbolic_only,
        } => commands::diagnose(&source, lambda, radii, tol, !symbolic_only, &opts, out),
        Command::Spectrum {
            source,
            radii,
            tol,
            exterior,
            outer,
            witness_lambda,
        } => commands::spectrum(&source, &radii, tol, exterior.zip(outer), witness_lambda, &opts, out),
        Command::Compare {
            source,
            mode,
            model,
            radius,
            times,
        } => {
            let mode = match mode {
                ModeArg::Comp1 => CompareMode::Comp1,
                ModeArg::Comp2 => CompareMode::Comp2,
                ModeArg::Generalized => CompareMode::Generalized,
            };
            commands::compare(&source, mode, &model, radius, &times, &opts, out)
        }
        Command::Verify {
            source,
            radius,
            samples,
            seed,
        } => commands::verify(&source, radius, samples, seed, &opts, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Inconclusive) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
