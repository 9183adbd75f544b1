use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ponder_cli::config::{self, GridSpec, RunConfig, RunKind};
use ponder_cli::{drivers, CliError};

/// Opto-mechanical entanglement of a two-tone optically trapped mirror:
/// spectra, sweeps and parameter maps as CSV.
#[derive(Parser)]
#[command(name = "ponder", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Output carrier-subcarrier entanglement vs sideband frequency.
    Spectrum(CommonArgs),
    /// Low-frequency output entanglement vs ambient temperature.
    TempSweep(CommonArgs),
    /// Analytic and numeric output entanglement vs the thermal
    /// degradation parameter.
    ThetaMap(CommonArgs),
    /// Intra-cavity bipartite entanglement vs temperature by the
    /// Lyapunov route, with a frequency-integration cross-check.
    Intracavity(CommonArgs),
    /// Eigenvalues, effective spring/damping and verdicts for one
    /// configuration.
    StabilityReport(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to a `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path for the CSV (defaults to the config `output` key,
    /// else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluation grid as `min,max,points,lin|log`.
    #[arg(long)]
    grid: Option<String>,
    /// Thermal-noise convention: `paper` or `symmetrized`.
    #[arg(long)]
    convention: Option<String>,
    /// Override a config key, e.g. `--set temperature=4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn load(args: &CommonArgs, kind: RunKind) -> Result<RunConfig, CliError> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = config::parse_config(&text)?;
    cfg.run = kind;
    if let Some(grid) = &args.grid {
        cfg.grid = Some(GridSpec::parse(grid).map_err(CliError::Config)?);
    }
    if let Some(conv) = &args.convention {
        cfg.convention = config::parse_convention(conv).map_err(CliError::Config)?;
    }
    for pair in &args.set {
        config::apply_override(&mut cfg, pair)?;
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

fn execute(args: &CommonArgs, kind: RunKind) -> Result<(), CliError> {
    let cfg = load(args, kind)?;
    let csv = drivers::run(&cfg)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Numeric(format!("cannot write to stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, kind) = match &cli.command {
        Command::Spectrum(a) => (a, RunKind::Spectrum),
        Command::TempSweep(a) => (a, RunKind::TempSweep),
        Command::ThetaMap(a) => (a, RunKind::ThetaMap),
        Command::Intracavity(a) => (a, RunKind::Intracavity),
        Command::StabilityReport(a) => (a, RunKind::StabilityReport),
    };
    match execute(args, kind) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
