//! Command-line experiments for bilinear Bochner-Riesz means.
//!
//! Every run writes a directory `<command>-<timestamp>-seed<seed>` under the
//! output root with a `manifest.json` and the command's CSV/SVG/field files.
//! Errors go to stderr as one line of JSON; exit status 2 marks invalid
//! input, 3 an exceeded budget, 4 a file-system failure.

mod commands;
mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use run::CliError;

#[derive(Parser)]
#[command(name = "brmeans", version, about = "Experiments with bilinear Bochner-Riesz means")]
struct Cli {
    /// Directory that receives one subdirectory per run
    #[arg(long, global = true, env = "BRMEANS_OUTPUT_ROOT", default_value = "brmeans-runs")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply S^alpha along several evaluation paths and compare them
    Evaluate(EvaluateArgs),
    /// Decay of the dyadic pieces: norm estimates or gamma coefficients
    Decay(DecayArgs),
    /// Smoothness thresholds: diagram export or a single query
    Regions(RegionsArgs),
    /// Kernel sweeps: closed form vs quadrature, dilation, envelope, decay
    Kernel(KernelArgs),
    /// Operator-norm lower bounds by witness search
    Norms(NormsArgs),
    /// Compare the Bessel series against the Poisson-integral oracle
    BesselCheck(BesselArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    Gaussian,
    Ball,
    Bump,
    Random,
}

#[derive(Args, Serialize)]
pub struct EvaluateArgs {
    /// Dimension (1 or 2)
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Samples per axis (power of two)
    #[arg(long = "N", default_value_t = 256)]
    pub samples: usize,
    /// Box side length
    #[arg(long = "L", default_value_t = 32.0)]
    pub side: f64,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Multiplier radius
    #[arg(long = "R", default_value_t = 1.0)]
    pub radius: f64,
    /// Comma-separated subset of oracle, radial, kernel, separable
    #[arg(long, value_delimiter = ',', default_value = "oracle,radial")]
    pub paths: Vec<String>,
    /// Radial quadrature nodes
    #[arg(long, default_value_t = 256)]
    pub nodes: usize,
    /// Rank cutoff K of the separable path
    #[arg(long, default_value_t = 512)]
    pub rank: usize,
    /// Last dyadic piece summed by the separable path
    #[arg(long, default_value_t = 12)]
    pub j_max: u32,
    #[arg(long, value_enum, default_value_t = InputKind::Gaussian)]
    pub f: InputKind,
    #[arg(long, value_enum, default_value_t = InputKind::Gaussian)]
    pub g: InputKind,
    /// Width (Gaussian) or radius (ball, bump) of the inputs
    #[arg(long, default_value_t = 2.0)]
    pub width: f64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayMode {
    Norms,
    Gamma,
}

#[derive(Args, Serialize)]
pub struct DecayArgs {
    #[arg(long, value_enum, default_value_t = DecayMode::Norms)]
    pub mode: DecayMode,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Gamma mode: decay margin, 0 < delta < alpha
    #[arg(long)]
    pub delta: Option<f64>,
    /// Piece indices, "a:b" (inclusive) or a comma list
    #[arg(long, default_value = "0:8")]
    pub j_range: String,
    #[arg(long, default_value = "1")]
    pub p1: String,
    #[arg(long, default_value = "1")]
    pub p2: String,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long = "N", default_value_t = 4096)]
    pub samples: usize,
    #[arg(long = "L", default_value_t = 1024.0)]
    pub side: f64,
    #[arg(long, default_value_t = 4)]
    pub trials: usize,
    /// Hill-climbing steps per trial
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Gamma mode: largest |k|
    #[arg(long, default_value_t = 64)]
    pub k_max: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Serialize)]
pub struct RegionsArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Grid nodes per axis of the (1/p1, 1/p2) square, minus one
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    /// Query mode: first exponent ("a/b", integer or "inf")
    #[arg(long)]
    pub p1: Option<String>,
    #[arg(long)]
    pub p2: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelCheck {
    Sweep,
    Dilation,
    Envelope,
    Decay,
}

#[derive(Args, Serialize)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value_t = KernelCheck::Sweep)]
    pub check: KernelCheck,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Sweep end (default 50; 100 for decay)
    #[arg(long)]
    pub rho_max: Option<f64>,
    /// Decay fit start
    #[arg(long, default_value_t = 10.0)]
    pub rho_min: f64,
    /// Radii in the sweep, including 0 and rho-max
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    /// Angle of the sample ray in the (|x1|, |x2|) quarter plane
    #[arg(long, default_value_t = 0.7)]
    pub psi: f64,
    #[arg(long, default_value_t = 256)]
    pub nodes: usize,
    /// Dilation radius
    #[arg(long = "R", default_value_t = 2.0)]
    pub radius: f64,
    /// Envelope power
    #[arg(long = "M", default_value_t = 2.0)]
    pub m: f64,
    #[arg(long, default_value = "0:6")]
    pub j_range: String,
    /// Decay: sampling step in rho
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormsExperiment {
    Bilinear,
    Lemma1,
    Corollary,
}

#[derive(Args, Serialize)]
pub struct NormsArgs {
    #[arg(long, value_enum, default_value_t = NormsExperiment::Bilinear)]
    pub experiment: NormsExperiment,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p1: Option<String>,
    #[arg(long)]
    pub p2: Option<String>,
    /// Lemma1: source exponent in [1, 2]
    #[arg(long)]
    pub p: Option<String>,
    /// Lemma1: outer band radius
    #[arg(long, default_value_t = 8.0)]
    pub b: f64,
    /// Lemma1: band widths
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
    pub widths: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Samples per axis (default 256; 2048 for lemma1)
    #[arg(long = "N")]
    pub samples: Option<usize>,
    /// Box side (default 32; 64 for lemma1, 16 for corollary)
    #[arg(long = "L")]
    pub side: Option<f64>,
    #[arg(long, default_value_t = 8)]
    pub trials: usize,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Serialize)]
pub struct BesselArgs {
    /// Orders, as rationals or decimals
    #[arg(long, value_delimiter = ',', default_value = "0,1/2,1,3/2,2,5/2")]
    pub orders: Vec<String>,
    /// Log-spaced arguments per order
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    #[arg(long, default_value_t = 0.01)]
    pub r_min: f64,
    #[arg(long, default_value_t = 200.0)]
    pub r_max: f64,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                std::process::exit(0);
            }
            let err = CliError::Usage(e.render().to_string().trim().to_string());
            eprintln!("{}", err.record());
            std::process::exit(err.exit_code());
        }
    };
    let result = match cli.command {
        Command::Evaluate(a) => commands::evaluate(a, &cli.out),
        Command::Decay(a) => commands::decay(a, &cli.out),
        Command::Regions(a) => commands::regions(a, &cli.out),
        Command::Kernel(a) => commands::kernel(a, &cli.out),
        Command::Norms(a) => commands::norms(a, &cli.out),
        Command::BesselCheck(a) => commands::bessel_check(a, &cli.out),
    };
    match result {
        Ok(dir) => println!("wrote {}", dir.display()),
        Err(err) => {
            eprintln!("{}", err.record());
            std::process::exit(err.exit_code());
        }
    }
}
