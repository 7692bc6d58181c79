//! Command-line front end. Every run reads one config (a file or a built-in preset) and
//! writes its tables to one output directory, or the main table to stdout.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 failed check, 3 numerical
//! non-convergence.

pub mod commands;
pub mod config;
pub mod output;
pub mod presets;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(crate::Error),

    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => 1,
            Self::Numerical(_) => 3,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::NonConvergence { .. } | crate::Error::BlowUp { .. } => Self::Numerical(e),
            crate::Error::Io(io) => Self::Io(io),
            other => Self::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sigmadamp", version, about = "Experiments for structurally damped σ-evolution equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML experiment config.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory; without it the main table goes to stdout.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Treat every failed check as an error (exit 2).
    #[arg(long, global = true)]
    pub strict: bool,

    /// Override the tolerance of decay-fit and kernel-norm.
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,

    /// Use a built-in config instead of --config.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Admissible ranges of p for the global existence theorems.
    Admissible,
    /// Fit decay exponents of the linear flow.
    DecayFit,
    /// L^r norms of the kernels over time, with exponent fits.
    KernelNorm,
    /// Solve the semilinear problem and log norms.
    Evolve,
    /// Scan the weighted high-frequency energy.
    Gevrey,
    /// Duhamel integral and Faà di Bruno checks.
    Toolkit,
    /// List the built-in presets.
    Presets,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Admissible => "admissible",
            Self::DecayFit => "decay-fit",
            Self::KernelNorm => "kernel-norm",
            Self::Evolve => "evolve",
            Self::Gevrey => "gevrey",
            Self::Toolkit => "toolkit",
            Self::Presets => "presets",
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    if cli.command == Command::Presets {
        let mut out = std::io::stdout().lock();
        for p in presets::PRESETS {
            writeln!(out, "{:<18} {:<12} {}", p.name, p.command, p.summary)?;
        }
        return Ok(0);
    }
    let (cfg, source) = load(cli)?;
    if let (Some(t), Command::Admissible | Command::Evolve | Command::Gevrey | Command::Toolkit) = (cli.tol, cli.command) {
        eprintln!("note: --tol {t} has no effect on {}", cli.command.name());
    }
    let report = match cli.command {
        Command::Admissible => commands::admissible(&cfg)?,
        Command::DecayFit => commands::decay_fit(&cfg, cli.tol)?,
        Command::KernelNorm => commands::kernel_norm(&cfg, cli.tol)?,
        Command::Evolve => commands::evolve(&cfg)?,
        Command::Gevrey => commands::gevrey(&cfg)?,
        Command::Toolkit => commands::toolkit(&cfg)?,
        Command::Presets => unreachable!(),
    };
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("config.toml"), source.trim_start())?;
            for (name, bytes) in &report.outputs {
                std::fs::write(dir.join(name), bytes)?;
            }
        }
        None => {
            if let Some((_, bytes)) = report.outputs.first() {
                std::io::stdout().lock().write_all(bytes)?;
            }
        }
    }
    for msg in &report.failures {
        eprintln!("check failed: {msg}");
    }
    for msg in &report.warnings {
        eprintln!("{}: {msg}", if cli.strict { "check failed" } else { "warning" });
    }
    let failed = !report.failures.is_empty() || (cli.strict && !report.warnings.is_empty());
    Ok(if failed { 2 } else { 0 })
}

fn load(cli: &Cli) -> Result<(ExperimentConfig, String), CliError> {
    match (&cli.config, &cli.preset) {
        (Some(_), Some(_)) => Err(CliError::Config("use either --config or --preset, not both".into())),
        (None, None) => Err(CliError::Config("no config given; use --config PATH or --preset NAME".into())),
        (Some(path), None) => ExperimentConfig::load(path),
        (None, Some(name)) => {
            let preset = presets::find(name).ok_or_else(|| {
                CliError::Config(format!("unknown preset {name:?}; known: {}", presets::names().join(", ")))
            })?;
            if preset.command != cli.command.name() {
                return Err(CliError::Config(format!(
                    "preset {name} belongs to `{}`, not `{}`",
                    preset.command,
                    cli.command.name()
                )));
            }
            let cfg = ExperimentConfig::parse(preset.config)?;
            Ok((cfg, preset.config.to_string()))
        }
    }
}
