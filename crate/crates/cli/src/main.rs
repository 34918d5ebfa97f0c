use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xxrelay_cli::{parse_config, run, CliError, Figure, Mode, Overrides};

/// Entanglement propagation sweeps for the XX spin chain.
#[derive(Debug, Parser)]
#[command(name = "xxrelay", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration (or a manifest from an earlier run).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "XXRELAY_OUT")]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Time step of the sampling grid.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Quadrature nodes per parameter axis.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Search horizon of the optimal-time scan.
    #[arg(long, global = true)]
    horizon: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run whatever mode the configuration names.
    Run,
    /// Maximize the averaged registration signal.
    OptimalTime,
    /// Pairwise concurrences of one state over time.
    Field,
    /// Concurrence groups, partial sums and their extrema.
    Relay,
    /// Cluster peaks and lifetimes for one state.
    Clusters,
    /// Critical parameters of cluster existence.
    Critical,
    /// Mean lifetimes over the parameter plane.
    Lifetime,
    /// Zero sender-receiver entanglement region.
    Boundary,
    /// Onset of sender-receiver entanglement on the bisectrix.
    Crossing,
    /// Data and plot script for one figure.
    ReproduceFigure { figure: Figure },
}

impl Command {
    fn mode(&self) -> Option<Mode> {
        Some(match self {
            Command::Run => return None,
            Command::OptimalTime => Mode::OptimalTime,
            Command::Field => Mode::Field,
            Command::Relay => Mode::Relay,
            Command::Clusters => Mode::Clusters,
            Command::Critical => Mode::Critical,
            Command::Lifetime => Mode::Lifetime,
            Command::Boundary => Mode::Boundary,
            Command::Crossing => Mode::Crossing,
            Command::ReproduceFigure { .. } => Mode::ReproduceFigure,
        })
    }
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    let text = match &cli.config {
        Some(path) => fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        None => String::new(),
    };
    let overrides = Overrides {
        mode: cli.command.mode(),
        figure: match cli.command {
            Command::ReproduceFigure { figure } => Some(figure),
            _ => None,
        },
        output_dir: cli.out,
        threads: cli.threads,
        dt: cli.dt,
        nodes: cli.nodes,
        horizon: cli.horizon,
    };
    let config = parse_config(&text, &overrides)?;
    let summary = run(&config)?;
    if let Some(t) = summary.registration_time {
        println!("registration time {t:.6}");
    }
    println!("wrote {} files to {}", summary.files.len(), summary.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
