//! Command-line front end: reads a run configuration (JSON file or bundled
//! preset), runs the solvers and writes CSV files with JSON sidecars.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod energy;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{execute, Command, Report};
pub use config::{preset, RunConfig};
pub use energy::Energy;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "rabishift",
    version,
    about = "Few-photon excitation of exciton chains and wells"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,

    /// JSON run configuration (a sidecar written by this tool also works).
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,

    /// Bundled configuration.
    #[arg(long, global = true, value_parser = clap::builder::PossibleValuesParser::new(config::preset_names()))]
    pub preset: Option<String>,

    /// Output directory [default: the config's output_dir, else ./out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Leave roots with b² below this out of weights.csv.
    #[arg(long, global = true)]
    pub weight_cutoff: Option<f64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CliCommand {
    /// Quasi-energies and weights of the one-photon sector.
    Spectrum,
    /// One-photon populations and mode amplitudes over time.
    Dynamics,
    /// Two-photon spectrum, populations and free-state projections.
    Twophoton,
    /// Three-level reference model, closed form next to exact propagation.
    Threelevel,
    /// Everything the config's `sectors` list asks for.
    Sweep,
}

impl From<CliCommand> for Command {
    fn from(c: CliCommand) -> Self {
        match c {
            CliCommand::Spectrum => Command::Spectrum,
            CliCommand::Dynamics => Command::Dynamics,
            CliCommand::Twophoton => Command::TwoPhoton,
            CliCommand::Threelevel => Command::ThreeLevel,
            CliCommand::Sweep => Command::Sweep,
        }
    }
}

impl Cli {
    /// The configuration after applying command-line overrides.
    pub fn resolve(&self) -> Result<(RunConfig, PathBuf), CliError> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => preset(name)?,
            (None, None) => {
                return Err(CliError::Config(
                    "one of --config or --preset is required".into(),
                ))
            }
        };
        if let Some(c) = self.weight_cutoff {
            cfg.weight_cutoff = c;
        }
        let out = self
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        // The location does not change results; keep it out of the sidecars.
        cfg.output_dir = None;
        cfg.validate()?;
        Ok((cfg, out))
    }

    pub fn run(&self) -> Result<Vec<PathBuf>, CliError> {
        let (cfg, out) = self.resolve()?;
        let work = || execute(self.command.into(), &cfg, &out)?.into_result();
        match self.threads {
            Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
                .install(work),
            None => work(),
        }
    }
}
