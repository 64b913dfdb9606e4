mod config;
mod error;
mod output;
mod plot;
mod run;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Mode;
use error::CliError;

/// Classical and quantum kicked rotor experiments.
#[derive(Parser, Debug)]
#[command(name = "kicked", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stroboscopic sections from a grid of starts in the unit cell.
    PhaseSpace,
    /// Quantum and classical energy series.
    Evolve,
    /// Energy series plus break times, power-law fits and MKR/KR ratios.
    Compare,
    /// Final momentum distributions P(m).
    Distribution,
    /// Compare runs over the Cartesian grid of kappa, tau and schedule lists.
    Sweep,
    /// Break time and power-law fits for an existing energy CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args, Debug)]
struct Flags {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Classical kick strength (comma list for sweep).
    #[arg(long, global = true)]
    kappa: Option<String>,
    /// Effective Planck constant (comma list for sweep).
    #[arg(long, global = true)]
    tau: Option<String>,
    /// kr, mkr or genN, comma separated.
    #[arg(long, global = true)]
    schedule: Option<String>,
    #[arg(long, global = true)]
    kicks: Option<String>,
    /// Momentum basis half-size B (2B grid points).
    #[arg(long, global = true)]
    basis: Option<String>,
    /// Classical trajectories (phase-space: number of grid starts).
    #[arg(long, global = true)]
    ensemble: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Spatial period 2πM of the quantum state.
    #[arg(long, global = true, value_name = "M")]
    boundary_mult: Option<String>,
    /// fock:m0 or gaussian:s, optionally with uniform or wigner.
    #[arg(long, global = true)]
    init: Option<String>,
    /// Output directory [default: $KICKED_ROTOR_OUT/<mode>].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    #[arg(long, global = true, value_name = "LO:HI")]
    fit_window: Option<String>,
    #[arg(long, global = true, value_name = "X")]
    break_threshold: Option<String>,
}

impl Flags {
    fn overrides(&self) -> impl Iterator<Item = (&'static str, &String)> {
        [
            ("kappa", &self.kappa),
            ("tau", &self.tau),
            ("schedule", &self.schedule),
            ("kicks", &self.kicks),
            ("basis", &self.basis),
            ("ensemble", &self.ensemble),
            ("seed", &self.seed),
            ("boundary-mult", &self.boundary_mult),
            ("init", &self.init),
            ("out", &self.out),
            ("fit-window", &self.fit_window),
            ("break-threshold", &self.break_threshold),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (mode, input) = match cli.command {
        Command::PhaseSpace => (Mode::PhaseSpace, None),
        Command::Evolve => (Mode::Evolve, None),
        Command::Compare => (Mode::Compare, None),
        Command::Distribution => (Mode::Distribution, None),
        Command::Sweep => (Mode::Sweep, None),
        Command::Fit { input } => (Mode::Fit, Some(input)),
    };
    let mut values = match &cli.flags.config {
        Some(path) => config::read_config_file(path)?,
        None => BTreeMap::new(),
    };
    for (k, v) in cli.flags.overrides() {
        values.insert(k.to_string(), v.clone());
    }
    let cfg = config::resolve(mode, &values, input)?;
    let manifest = run::execute(&cfg)?;
    println!("wrote {} files to {}", manifest.files.len() + 1, cfg.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kicked: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
