//! Command-line front end: configuration loading and CSV-producing
//! subcommands.

pub mod commands;
pub mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use recoil_core::EvaluationMode;

use crate::config::{DistributionName, KeyValues, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "recoil", version, about = "Visibility and phase of a three-grating atom interferometer with photon recoil")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Key-value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output CSV path (standard output when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the `distribution` key.
    #[arg(long, global = true)]
    pub distribution: Option<String>,
    /// Overrides the `sweep_points` key.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Closed forms or quadrature for the model curve.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Analytic)]
    pub mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Analytic,
    Numeric,
}

impl From<Mode> for EvaluationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Analytic => EvaluationMode::Analytic,
            Mode::Numeric => EvaluationMode::Numeric,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Visibility and phase curve of the chosen distribution.
    SweepAnalytic,
    /// Visibility and phase from the wave-propagation pipeline.
    SweepNumeric,
    /// Intensity behind the first grating.
    Carpet,
    /// Model curve merged with experimental points.
    Overlay {
        /// CSV with rows `dp_over_lambda_i,value,kind` (overrides the `overlay` key).
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
}

/// Resolves the configuration from the file and command-line overrides.
pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut overrides = KeyValues::default();
    if let Some(d) = &cli.distribution {
        if DistributionName::parse(d).is_none() {
            anyhow::bail!("--distribution `{d}` is not one of {}", DistributionName::NAMES);
        }
        overrides.set("distribution", d);
    }
    if let Some(p) = cli.points {
        overrides.set("sweep_points", &p.to_string());
    }
    let config = match &cli.config {
        Some(path) => RunConfig::load(path, &overrides)?,
        None => RunConfig::from_key_values(&overrides, None)?,
    };
    Ok(config)
}

pub fn run(cli: &Cli) -> Result<()> {
    let config = load_config(cli)?;
    let out_path = cli.out.clone().or_else(|| config.out.clone());
    let mut sink: Box<dyn Write> = match &out_path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    match &cli.command {
        Command::SweepAnalytic => commands::sweep_analytic(&config, cli.mode.into(), &mut sink)?,
        Command::SweepNumeric => commands::sweep_numeric(&config, &mut sink)?,
        Command::Carpet => commands::carpet(&config, &mut sink)?,
        Command::Overlay { overlay } => {
            let points = match overlay.clone().or_else(|| config.overlay.clone()) {
                Some(p) => commands::read_overlay(&p)?,
                None => Vec::new(),
            };
            commands::overlay(&config, cli.mode.into(), &points, &mut sink)?
        }
    }
    sink.flush()?;
    Ok(())
}
