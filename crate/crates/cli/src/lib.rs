//! Command-line front end: configuration files, command dispatch and CSV
//! output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use backaction::NoiseModel;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{CurveOptions, CurveSelection};
use crate::config::{parse_config, RunConfig};
use crate::error::{CliError, Result};
use crate::output::OutputSet;

/// Environment variable capping the number of worker threads.
pub const WORKERS_ENV: &str = "BACKACTION_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "backaction", version, about = "Back-action amplification in a detuned optomechanical cavity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides run.seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Detunings in units of the cavity linewidth, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub detuning: Vec<f64>,
    /// Overrides drive.power_w, in mW.
    #[arg(long)]
    pub power_mw: Option<f64>,
    /// Finite cavity bandwidth corrections to the quantum noise.
    #[arg(long, value_enum, default_value = "on")]
    pub finite_bandwidth: Switch,
    /// Restrict sensitivity output to the amplified (on) or plain (off) curve.
    #[arg(long, value_enum)]
    pub amplified: Option<Switch>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Amplification factor traces, one per detuning.
    Amplification(CommonArgs),
    /// Quantum-limited sensitivity curves and quantum limits.
    Sensitivity(CommonArgs),
    /// Thermal noise spectra and the swept-sine response.
    Spectrum(CommonArgs),
    /// Emulated three-step measurement.
    Experiment(CommonArgs),
    /// Amplification and sensitivity with one configuration key varied.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Configuration key to vary.
        #[arg(long)]
        key: String,
        /// Values of the key, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        values: Vec<String>,
    },
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Amplification(c)
            | Command::Sensitivity(c)
            | Command::Spectrum(c)
            | Command::Experiment(c) => c,
            Command::Sweep { common, .. } => common,
        }
    }
}

pub fn load_config(args: &CommonArgs) -> Result<RunConfig> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    parse_config(&text).map_err(|e| CliError::ConfigFile {
        path: args.config.clone(),
        message: e.to_string(),
    })
}

/// Applies command-line overrides. A single `--detuning` replaces the
/// configured one; lists are only meaningful for `amplification`.
fn apply_overrides(config: &mut RunConfig, args: &CommonArgs, allow_list: bool) -> Result<()> {
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(p) = args.power_mw {
        config.drive_power_w = p * 1e-3;
    }
    match args.detuning.as_slice() {
        [] => {}
        [d] => config.drive_detuning_over_gamma = *d,
        _ if allow_list => {}
        _ => return Err(CliError::Usage("this command takes a single --detuning value".into())),
    }
    config.validate()?;
    Ok(())
}

fn curve_options(args: &CommonArgs) -> CurveOptions {
    CurveOptions {
        model: match args.finite_bandwidth {
            Switch::On => NoiseModel::FiniteBandwidth,
            Switch::Off => NoiseModel::Narrowband,
        },
        curves: match args.amplified {
            None => CurveSelection::Both,
            Some(Switch::On) => CurveSelection::AmplifiedOnly,
            Some(Switch::Off) => CurveSelection::UnamplifiedOnly,
        },
    }
}

fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(WORKERS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got `{raw}`")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
}

/// Computes every output of `command` without writing anything.
pub fn plan(command: &Command, config: &RunConfig) -> Result<OutputSet> {
    let args = command.common();
    let mut config = config.clone();
    apply_overrides(&mut config, args, matches!(command, Command::Amplification(_)))?;
    match command {
        Command::Amplification(_) => {
            let detunings = if args.detuning.is_empty() {
                vec![config.drive_detuning_over_gamma]
            } else {
                args.detuning.clone()
            };
            commands::amplification(&config, &detunings)
        }
        Command::Sensitivity(_) => commands::sensitivity(&config, curve_options(args)),
        Command::Spectrum(_) => commands::spectrum(&config),
        Command::Experiment(_) => commands::experiment(&config),
        Command::Sweep { key, values, .. } => {
            worker_pool()?.install(|| commands::sweep(&config, key, values, curve_options(args)))
        }
    }
}

/// Loads the configuration, computes, then writes the output directory.
/// Returns the summary lines.
pub fn execute(cli: &Cli) -> Result<Vec<String>> {
    let args = cli.command.common();
    let config = load_config(args)?;
    let out = plan(&cli.command, &config)?;
    out.commit(&args.out)?;
    Ok(out.summary().to_vec())
}
