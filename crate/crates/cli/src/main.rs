//! `hdgnet` experiment runner.

mod plan;
mod run;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hdgnet::analysis::mesh_report;
use hdgnet::network::fixtures;
use hdgnet::scheme::{build_mesh, MeshStrategy, SolveConfig};
use plan::{parse_h, parse_ks, parse_list, parse_mesh, parse_number, parse_snapshot, ExperimentPlan, Source};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit status when at least one sweep entry failed.
const EXIT_ENTRY_FAILED: u8 = 1;
/// Exit status for invalid input.
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "hdgnet", version, about = "HDG solver for convection-diffusion on pipe networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an (eps, h) convergence sweep and write CSV reports.
    Run(RunArgs),
    /// Write the mesh of one configuration as CSV.
    Mesh(MeshArgs),
    /// List bundled networks, or print one.
    Fixtures {
        /// Fixture to print as a network document.
        name: Option<String>,
    },
}

#[derive(Args)]
struct NetworkArgs {
    /// Bundled network name.
    #[arg(long)]
    fixture: Option<String>,
    /// Network document (TOML).
    #[arg(long)]
    network: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// Polynomial orders, comma separated.
    #[arg(long, default_value = "2")]
    k: String,
    /// Stabilisation parameter.
    #[arg(long, default_value = "1")]
    alpha: String,
    /// Diffusion coefficients, comma separated.
    #[arg(long, default_value = "1e-2")]
    eps: String,
    /// Mesh sizes: a list, or `start:end` for successive halvings.
    #[arg(long, default_value = "1/8:1/64")]
    h: String,
    /// Time step as a multiple of h.
    #[arg(long, default_value = "0.5")]
    tau_ratio: String,
    /// Final time; defaults to the network's horizon.
    #[arg(long)]
    tmax: Option<String>,
    #[arg(long, default_value = "graded", value_parser = ["uniform", "graded", "adaptive"])]
    mesh: String,
    /// Snapshot times, e.g. `t=1,3`.
    #[arg(long)]
    snapshot: Option<String>,
    /// Sample points per element in snapshot files.
    #[arg(long, default_value_t = 5)]
    samples: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to available cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct MeshArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long, default_value = "2")]
    k: usize,
    #[arg(long, default_value = "1e-2")]
    eps: String,
    #[arg(long, default_value = "1/16")]
    h: String,
    #[arg(long, default_value = "graded", value_parser = ["uniform", "graded", "adaptive"])]
    mesh: String,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_plan(args: RunArgs) -> Result<ExperimentPlan> {
    let source = Source::from_flags(args.network.fixture, args.network.network)?;
    let problem = source.load()?;
    let t_max = match &args.tmax {
        Some(s) => parse_number(s).context("--tmax")?,
        None => problem.horizon,
    };
    let base = SolveConfig {
        alpha: parse_number(&args.alpha).context("--alpha")?,
        tau_ratio: parse_number(&args.tau_ratio).context("--tau-ratio")?,
        t_max,
        mesh: parse_mesh(&args.mesh)?,
        ..SolveConfig::default()
    };
    let plan = ExperimentPlan {
        source,
        problem,
        base,
        ks: parse_ks(&args.k).context("--k")?,
        eps: parse_list(&args.eps).context("--eps")?,
        hs: parse_h(&args.h).context("--h")?,
        snapshots: match &args.snapshot {
            Some(s) => parse_snapshot(s).context("--snapshot")?,
            None => Vec::new(),
        },
        samples: args.samples,
        out: args.out,
        jobs: args.jobs,
    };
    plan.validate()?;
    Ok(plan)
}

fn run_command(args: RunArgs) -> Result<ExitCode> {
    let plan = match build_plan(args) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Ok(ExitCode::from(EXIT_INVALID));
        }
    };
    for &k in &plan.ks {
        if let Some(w) = plan.problem.boundary.compatibility_warning(k) {
            eprintln!("warning: {w}");
        }
    }
    let summary = run::run(&plan)?;
    eprintln!(
        "{} entries, {} failed; results in {}",
        summary.entries,
        summary.failures,
        plan.out.display()
    );
    Ok(if summary.failures > 0 {
        ExitCode::from(EXIT_ENTRY_FAILED)
    } else {
        ExitCode::SUCCESS
    })
}

fn mesh_command(args: MeshArgs) -> Result<ExitCode> {
    let source = Source::from_flags(args.network.fixture, args.network.network)?;
    let problem = source.load()?;
    let config = SolveConfig {
        k: args.k,
        eps: parse_number(&args.eps).context("--eps")?,
        h: parse_number(&args.h).context("--h")?,
        mesh: parse_mesh(&args.mesh)?,
        ..SolveConfig::default()
    };
    config.validate()?;
    let mesh = build_mesh(&config, &problem.topology)?;
    let csv = mesh.to_csv(&problem.topology);
    match &args.out {
        Some(path) => std::fs::write(path, csv).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{csv}"),
    }
    let s = mesh_report(&config, &problem.topology)?;
    let layer_note = if config.mesh == MeshStrategy::Uniform { " (uniform mesh)" } else { "" };
    eprintln!(
        "elements {}, uniform {}, layer {}{layer_note}, widths [{:e}, {:e}]",
        s.elements, s.uniform_elements, s.layer_elements, s.min_width, s.max_width
    );
    Ok(ExitCode::SUCCESS)
}

fn fixtures_command(name: Option<String>) -> Result<ExitCode> {
    match name {
        None => {
            for n in fixtures::NAMES {
                println!("{n}");
            }
        }
        Some(n) => print!("{}", Source::Fixture(n).text()?),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run_command(args),
        Command::Mesh(args) => mesh_command(args),
        Command::Fixtures { name } => fixtures_command(name),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(EXIT_INVALID)
    })
}
