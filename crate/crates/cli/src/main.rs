use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod error;

use error::CliError;

/// Phase-space simulator for non-Hermitian quadratic oscillators.
///
/// Exit codes: 0 success, 2 usage or validation error, 3 numerical
/// instability, 1 any other failure (I/O).
#[derive(Parser, Debug)]
#[command(name = "nhwigner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Model, grid and configuration-file flags shared by all subcommands.
/// Flags override values read from `--config`.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// elliptic (beta = alpha), hyperbolic (beta = -alpha) or general
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// grid half-width
    #[arg(long = "L")]
    pub half_width: Option<f64>,
    /// grid points per axis
    #[arg(long = "N")]
    pub n_points: Option<usize>,
    /// `key = value` run configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decay-constant spectrum as CSV.
    #[command(allow_negative_numbers = true)]
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long = "n-max", default_value_t = 3)]
        n_max: u32,
        #[arg(long = "nu-max", default_value_t = 3)]
        nu_max: u32,
        /// output file (stdout if absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample one basis function on the grid.
    #[command(allow_negative_numbers = true)]
    Basis {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        nu: i32,
        /// + or -
        #[arg(long, default_value = "+")]
        parity: String,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// comma-separated subset of csv-matrix, pgm
        #[arg(long)]
        format: Option<String>,
    },
    /// Project a csv-matrix onto the elliptic basis.
    #[command(allow_negative_numbers = true)]
    Project {
        /// csv-matrix file
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "n-max", default_value_t = 8)]
        n_max: u32,
        #[arg(long = "nu-max", default_value_t = 8)]
        nu_max: u32,
        /// coefficient file (stdout if absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the evolution law numerically.
    #[command(allow_negative_numbers = true)]
    Evolve(EvolveArgs),
    /// Critical (infinite-lifetime) conditions per angular index.
    #[command(allow_negative_numbers = true)]
    Resonance {
        #[command(flatten)]
        common: Common,
        #[arg(long = "nu-max", default_value_t = 3)]
        nu_max: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Breit-Wigner energy distribution as CSV.
    #[command(allow_negative_numbers = true)]
    Bw {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        nu: i32,
        /// window start (default location - 5 widths)
        #[arg(long = "e-min")]
        e_min: Option<f64>,
        /// window end (default location + 5 widths)
        #[arg(long = "e-max")]
        e_max: Option<f64>,
        #[arg(long, default_value_t = 1001)]
        samples: usize,
        /// add a column from the numerical half-line transform
        #[arg(long)]
        numeric: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub nu: Option<i32>,
    #[arg(long)]
    pub parity: Option<String>,
    /// comma-separated `n:nu[:parity]` list; each mode is a separate run
    #[arg(long)]
    pub modes: Option<String>,
    /// coefficient file (`n,nu,parity,coeff`) as the initial state
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
    /// Gaussian initial state `q0,p0,width`
    #[arg(long)]
    pub gaussian: Option<String>,
    /// time step (default half the stability bound)
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    #[arg(long = "record-every")]
    pub record_every: Option<usize>,
    #[arg(long)]
    pub normalized: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// comma-separated subset of csv-matrix, csv-series, pgm
    #[arg(long)]
    pub format: Option<String>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum { common, n_max, nu_max, out } => commands::spectrum(&common, n_max, nu_max, out),
        Command::Basis { common, n, nu, parity, t, out, format } => {
            commands::basis(&common, n, nu, &parity, t, out, format)
        }
        Command::Project { input, n_max, nu_max, out } => commands::project(&input, n_max, nu_max, out),
        Command::Evolve(args) => commands::evolve(&args),
        Command::Resonance { common, nu_max, out } => commands::resonance(&common, nu_max, out),
        Command::Bw { common, n, nu, e_min, e_max, samples, numeric, out } => {
            commands::bw(&common, n, nu, e_min, e_max, samples, numeric, out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
