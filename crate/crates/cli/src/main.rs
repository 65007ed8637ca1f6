//! Batch front-end for the cavity self-organization model.
//!
//! `cavity-selforg <command> <config.toml> [--set key=value]...`
//!
//! Exit status: 0 on success, 2 for configuration or usage errors, 3 when the
//! numerics failed for every requested row.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// One steady state at `params.eta`.
    Steady,
    /// Steady states along the sweep axis.
    OrderSweep,
    /// Lowest excitation branches along a pump sweep.
    Spectrum,
    /// Uniform-phase roots of the four-mode characteristic polynomial.
    Quartic,
    /// Defect boundary in `|u0|` for each pump value.
    PhaseDiagram,
    /// Quantum depletion along a pump sweep.
    Depletion,
    /// Self-organization threshold.
    Critical,
}

#[derive(Debug, Parser)]
#[command(version, about = "Steady states, excitations and depletion of a pumped BEC in a lossy cavity")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    config: PathBuf,
    /// Override one configuration entry, e.g. `--set params.eta=80`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

const THREADS_VAR: &str = "CAVITY_SELFORG_THREADS";

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the worker pool: {e}")))
}

fn header(command: Command, cfg: &RunConfig) -> Vec<String> {
    let name = command.to_possible_value().expect("no skipped variants").get_name().to_string();
    vec![
        format!("cavity-selforg {} {name}", env!("CARGO_PKG_VERSION")),
        "frequencies, energies and rates in units of the recoil frequency".into(),
        "--- config ---".into(),
        cfg.to_toml().trim_end().to_string(),
        "--- end config ---".into(),
    ]
}

fn run(cli: &Cli) -> Result<(), CliError> {
    init_threads()?;
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", cli.config.display())))?;
    let cfg = RunConfig::load(&text, &cli.overrides)?;
    let outcome = match cli.command {
        Command::Steady => commands::steady(&cfg),
        Command::OrderSweep => commands::order_sweep(&cfg),
        Command::Spectrum => commands::spectrum(&cfg),
        Command::Quartic => commands::quartic(&cfg),
        Command::PhaseDiagram => commands::phase_diagram(&cfg),
        Command::Depletion => commands::depletion(&cfg),
        Command::Critical => commands::critical(&cfg),
    }?;
    let mut table = outcome.table;
    table.comments = header(cli.command, &cfg);
    let bytes = table.render(cfg.output.format);
    match &cfg.output.path {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| CliError::Config(format!("cannot write output: {e}")))?;
        }
    }
    if outcome.ok_rows == 0 && !table.rows.is_empty() {
        return Err(CliError::Numerical(format!("all {} rows failed; diagnostics were written", table.rows.len())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cavity-selforg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
