//! Command-line surface: `analyze`, `timemap`, `melnikov`, `scatter`,
//! `horseshoe certify|periodic` and `ap-scan`.
//!
//! Exit codes: 0 success or granted, 1 configuration or runtime error,
//! 2 declined, 3 inconclusive. `HORSESHOE_THREADS` caps the worker count.

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use commands::certification;
use config::{AnalyzeConfig, TimeMapConfig, TimeMapQuery};

use crate::timemap::TimeMapKind;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        1
    }
}

#[derive(Debug, Parser)]
#[command(name = "apdyn", version, about = "Phase plane, time maps, Melnikov functions, Poincare maps and horseshoes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    #[value(name = "O")]
    O,
    #[value(name = "V")]
    V,
    #[value(name = "U")]
    U,
    #[value(name = "generic")]
    Generic,
}

impl From<KindArg> for TimeMapKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::O => Self::O,
            KindArg::V => Self::V,
            KindArg::U => Self::U,
            KindArg::Generic => Self::Generic,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Equilibria, level classification and optional horseshoe regions (JSON).
    Analyze {
        #[arg(long, conflicts_with_all = ["f", "k", "rho"])]
        config: Option<PathBuf>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        k: Option<f64>,
        #[arg(long, allow_negative_numbers = true, num_args = 1..)]
        rho: Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Travel times along energy levels (CSV).
    Timemap {
        #[arg(long, conflicts_with_all = ["f", "k", "rho", "kind", "r", "x2"])]
        config: Option<PathBuf>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        k: Option<f64>,
        #[arg(long, allow_negative_numbers = true, num_args = 1..)]
        rho: Vec<f64>,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long, allow_negative_numbers = true)]
        r: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        x2: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Melnikov function and eta transform (delta.csv, eta.csv, report.json).
    Melnikov {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Poincare iterates of a line of initial conditions (CSV).
    Scatter {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Horseshoe certification and periodic itineraries (JSON).
    Horseshoe {
        #[command(subcommand)]
        action: HorseshoeAction,
    },
    /// Fixed points of the period map against the forcing level k (CSV).
    ApScan {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Subcommand)]
enum HorseshoeAction {
    Certify {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    Periodic {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated symbols of one periodic word; repeatable.
        #[arg(long, value_delimiter = ',', num_args = 1.., action = clap::ArgAction::Append)]
        itinerary: Vec<usize>,
        #[command(flatten)]
        output: Output,
    },
}

fn required<T>(v: Option<T>, key: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config { key: key.to_string(), message: "required without --config".into() })
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("HORSESHOE_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Config {
        key: "HORSESHOE_THREADS".into(),
        message: format!("expected a positive integer, got `{raw}`"),
    })?;
    // The global pool can only be sized once per process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Analyze { config, f, k, rho, output } => {
            let cfg = match config {
                Some(p) => config::load(&p)?,
                None => AnalyzeConfig { f: required(f, "f")?, k: required(k, "k")?, rho, regions: None },
            };
            commands::analyze(&cfg, output.out.as_deref())
        }
        Command::Timemap { config, f, k, rho, kind, r, x2, output } => {
            let cfg = match config {
                Some(p) => config::load(&p)?,
                None => {
                    let (kind, r) = (required(kind, "kind")?.into(), required(r, "r")?);
                    if rho.is_empty() {
                        return Err(CliError::Config { key: "rho".into(), message: "required without --config".into() });
                    }
                    let queries = rho.iter().map(|&rho| TimeMapQuery { rho, kind, r, x2 }).collect();
                    TimeMapConfig { f: required(f, "f")?, k: required(k, "k")?, queries }
                }
            };
            commands::timemap(&cfg, output.out.as_deref())
        }
        Command::Melnikov { config, out_dir } => commands::melnikov(&config::load(&config)?, &out_dir),
        Command::Scatter { config, output } => commands::scatter_cmd(&config::load(&config)?, output.out.as_deref()),
        Command::Horseshoe { action } => match action {
            HorseshoeAction::Certify { config, output } => {
                commands::horseshoe_certify(&config::load(&config)?, output.out.as_deref())
            }
            HorseshoeAction::Periodic { config, itinerary, output } => {
                let words = (!itinerary.is_empty()).then(|| vec![itinerary]);
                commands::horseshoe_periodic(&config::load(&config)?, words, output.out.as_deref())
            }
        },
        Command::ApScan { config, output } => commands::ap_scan(&config::load(&config)?, output.out.as_deref()),
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("apdyn: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(run(["apdyn", "frobnicate"]), 1);
        assert_eq!(run(["apdyn", "timemap", "--f", "abs", "--k", "0", "--kind", "U", "--r", "1"]), 1);
        assert_eq!(run(["apdyn", "--help"]), 0);
    }
}
