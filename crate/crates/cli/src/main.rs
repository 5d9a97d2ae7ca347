//! `qilab`: command-line front end. Every subcommand writes plot-ready CSV
//! and flat JSON into `--out`, plus a manifest recording how they were made.
//!
//! Exit codes: 0 on success, 1 for invalid flags or arguments, 2 when a
//! numerical stage fails.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "qilab", version, about = "Spatial quantum inequality laboratory")]
struct Cli {
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "qilab-out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
pub struct WellArgs {
    /// Barrier height V0.
    #[arg(long, allow_negative_numbers = true)]
    pub v0: f64,
    /// Barrier half-width a.
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    /// Coupling multiplying V0.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda: f64,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
pub struct QuadArgs {
    /// Head cutoff of the κ integrals (default 200/a).
    #[arg(long)]
    pub kmax: Option<f64>,
    /// Relative tolerance of the κ integrals.
    #[arg(long, default_value_t = 1e-8)]
    pub rtol: f64,
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
pub struct GridArgs {
    /// Number of uniform grid points before wall exclusion.
    #[arg(long, default_value_t = 401)]
    pub grid: usize,
    /// Grid half-extent (default 2a).
    #[arg(long)]
    pub xmax: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Eta {
    Auto,
    Value(f64),
}

fn parse_eta(s: &str) -> Result<Eta, String> {
    if s == "auto" {
        return Ok(Eta::Auto);
    }
    s.parse::<f64>()
        .map(Eta::Value)
        .map_err(|_| format!("expected a number or `auto`, got `{s}`"))
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Link,
    Central,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(untagged)]
enum Command {
    /// Energy density profile and E_KE by all three routes.
    Density {
        #[command(flatten)]
        well: WellArgs,
        #[command(flatten)]
        quad: QuadArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// E_KE by all three routes.
    Energy {
        #[command(flatten)]
        well: WellArgs,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Spatial quantum inequality verdict for the exponential plateau.
    Qi {
        #[command(flatten)]
        well: WellArgs,
        #[command(flatten)]
        quad: QuadArgs,
        /// Sampling decay rate, or `auto` for half the violation threshold.
        #[arg(long, value_parser = parse_eta, allow_negative_numbers = true)]
        eta: Eta,
    },
    /// Overlap integrals between barrier and free modes.
    Modes {
        #[command(flatten)]
        well: WellArgs,
        /// Momenta per axis.
        #[arg(long, default_value_t = 32)]
        nk: usize,
        /// Largest momentum (default 10/a).
        #[arg(long)]
        qmax: Option<f64>,
    },
    /// Linear ramp of the barrier to first order.
    Ramp {
        #[command(flatten)]
        well: WellArgs,
        /// Ramp rate; the barrier reaches full height at t = 1/alpha.
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        /// Momentum cutoff (default 50/a).
        #[arg(long)]
        kmax: Option<f64>,
        /// Intervals on the uniform momentum segment.
        #[arg(long)]
        nk: Option<usize>,
        /// Sampling decay rate for the post-ramp verdict.
        #[arg(long)]
        eta: Option<f64>,
        /// Relative tolerance of the E_KE integral.
        #[arg(long, default_value_t = 1e-8)]
        rtol: f64,
    },
    /// Post-quench two-pulse evolution of the density.
    Pulses {
        #[command(flatten)]
        well: WellArgs,
        #[command(flatten)]
        quad: QuadArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Snapshot times, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0", allow_negative_numbers = true)]
        t: Vec<f64>,
        /// Positive values count as a pulse only above this level
        /// (default 1e-9 of the profile peak).
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Lattice vacuum, quench and energy diagnostics.
    Oracle {
        #[command(flatten)]
        well: WellArgs,
        /// Box half-length.
        #[arg(long = "L")]
        half_length: f64,
        /// Number of lattice cells (even).
        #[arg(long = "M")]
        sites: usize,
        /// Times after the quench, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0", allow_negative_numbers = true)]
        t: Vec<f64>,
        /// Finite-difference form of the gradient.
        #[arg(long, value_enum, default_value_t = Scheme::Link)]
        scheme: Scheme,
        /// Relative tolerance of the continuum E_KE integral.
        #[arg(long, default_value_t = 1e-8)]
        rtol: f64,
    },
    /// Tables of continuum against lattice densities found in `--out`.
    Compare,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Density { .. } => "density",
            Command::Energy { .. } => "energy",
            Command::Qi { .. } => "qi",
            Command::Modes { .. } => "modes",
            Command::Ramp { .. } => "ramp",
            Command::Pulses { .. } => "pulses",
            Command::Oracle { .. } => "oracle",
            Command::Compare => "compare",
        }
    }
}

/// Failure of a run, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<qilab::Error> for Failure {
    fn from(e: qilab::Error) -> Self {
        match e {
            qilab::Error::Domain(_) | qilab::Error::ConfigMismatch(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("QI_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Usage(format!("QI_LAB_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot size the thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = configure_threads().and_then(|_| commands::run(&cli.command, &cli.out));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
