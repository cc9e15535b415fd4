//! `cwlab` — scenario-driven front end for the corner-wave laboratory.
//!
//! Every subcommand reads one scenario file (`--config`), optionally patched
//! by `--set section.key=value` overlays, and writes its artifacts into the
//! output directory.  Failures print a single-line JSON object on stderr and
//! exit with a code that identifies the module at fault (2 config,
//! 3 geometry, 4 hamiltonian, 5 tracer, 6 spectral, 7 regularity, 8 I/O,
//! 9 internal).  Identical config, overlays and seed produce byte-identical
//! artifacts; `CWLAB_THREADS` caps the worker-thread count without changing
//! any output.

mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{Overrides, Scenario};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "cwlab",
    version,
    about = "Corner-domain wave laboratory: ray tracing, sector spectral solves, front regularity"
)]
struct Cli {
    /// Scenario file (sections [domain], [experiment], [tolerances], [output])
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides `[output] dir`
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// RNG seed; overrides `[experiment] seed`
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Override one config value, e.g. --set experiment.samples=64
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Trace a broken bicharacteristic; writes raypath.csv
    Trace,
    /// Diffracted fan at a corner; writes fan.csv
    Fan,
    /// Near-miss family around a corner-aimed ray; writes nearmiss.csv
    Limit,
    /// Synthesize the sector wave field; writes field.cwlf and field.csv
    SectorWave,
    /// Measure front regularity exponents; writes regularity.json
    Measure,
    /// Calibrate the exponent estimator; writes calibration.csv
    Calibrate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Trace => "trace",
            Command::Fan => "fan",
            Command::Limit => "limit",
            Command::SectorWave => "sector-wave",
            Command::Measure => "measure",
            Command::Calibrate => "calibrate",
        }
    }
}

fn cap_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CWLAB_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| {
            CliError::Config(format!("CWLAB_THREADS must be a positive integer, got `{raw}`"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(format!("cannot build worker pool: {e}")))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    cap_threads()?;
    let config = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("no config file given (use --config PATH)".into()))?;
    let ov = Overrides { sets: &cli.set, out: cli.out.as_deref(), seed: cli.seed };
    let scn = Scenario::from_file(config, &ov, cli.command.name())?;
    match cli.command {
        Command::Trace => commands::run_trace(scn),
        Command::Fan => commands::run_fan(scn),
        Command::Limit => commands::run_limit(scn),
        Command::SectorWave => commands::run_sector_wave(scn),
        Command::Measure => commands::run_measure(scn),
        Command::Calibrate => commands::run_calibrate(scn),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code());
    }
}
