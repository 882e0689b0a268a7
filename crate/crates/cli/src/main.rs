//! `bubble-lab`: batch front end for the soap-bubble laboratory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod spec_file;

use std::path::PathBuf;
use std::process::ExitCode;

use bubble_lab::LabError;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bubble-lab", version, about = "CMC soap bubbles in warped products Y x R")]
pub struct Cli {
    /// key=value file mirroring the command-line flags; explicit flags win.
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build bubble-family members and write `family.csv`.
    Family(FamilyArgs),
    /// Spectral stability report for one member, written to `stability.json`.
    Stability(StabilityArgs),
    /// Volume-constrained descent of the slice-volume area functional.
    Flow(FlowArgs),
    /// Evaluate the closed-form bounds on one member.
    Bounds(BoundsArgs),
    /// Embed Y in R^3 and export meshes and profile plots.
    Embed(EmbedArgs),
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    /// Builtin profile (`ex1`, `ex2`) or a CSV file with header `s,phi`.
    #[arg(long, default_value = "ex1")]
    pub profile: String,
    /// Builtin domain margin: `s_max = L - margin`.
    #[arg(long, default_value_t = 0.05)]
    pub margin: f64,
    /// Warp constant.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Tilt-angle nodes per profile.
    #[arg(long, default_value_t = 2000)]
    pub nodes: usize,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct MemberArgs {
    /// Family parameter, `0 < s1 < s0`.
    #[arg(long)]
    pub s1: Option<f64>,
    /// Enclosed volume; solved for `s1`.
    #[arg(long)]
    pub v: Option<f64>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct FamilyMembers {
    /// Single member, `0 < s1 < s0`.
    #[arg(long)]
    pub s1: Option<f64>,
    /// Uniform sweep `start:end:count`.
    #[arg(long, value_name = "START:END:COUNT")]
    pub s1_range: Option<String>,
    /// Single member of this enclosed volume.
    #[arg(long)]
    pub v: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub members: FamilyMembers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BetaReadingArg {
    /// `phi_s` inside the maximum.
    PhiS,
    /// The constant `phi_s(s1)`.
    PhiSAtS1,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub member: MemberArgs,
    #[arg(long, default_value_t = 16)]
    pub k_max: usize,
    /// Eigenvalues reported per sector.
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    /// Verdict tolerance relative to the largest eigenvalue.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = BetaReadingArg::PhiS)]
    pub beta_reading: BetaReadingArg,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    /// Torus dimension (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Period of every axis.
    #[arg(long, default_value_t = 1.0)]
    pub length: f64,
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    /// Ball dimension n.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Mean slice volume of the random start.
    #[arg(long, default_value_t = 100.0)]
    pub a: f64,
    /// Sup norm of the random fluctuation.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Headerless CSV grid replacing the random start.
    #[arg(long, value_name = "FILE")]
    pub init: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub max_steps: usize,
    /// Initial step size; derived from the grid when absent.
    #[arg(long)]
    pub step: Option<f64>,
    /// Stop once `|tau|_inf / a` falls below this.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Random fields for the positivity-lemma check.
    #[arg(long, default_value_t = 100)]
    pub lemma_trials: usize,
    /// Mean slice volume of the lemma's random fields.
    #[arg(long, default_value_t = 1e4)]
    pub lemma_a: f64,
    /// Fluctuation constant C of the lemma.
    #[arg(long, default_value_t = 1.0)]
    pub lemma_c: f64,
    /// Radius gradient bound C' of the lemma.
    #[arg(long, default_value_t = 1.0)]
    pub lemma_c_prime: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub member: MemberArgs,
    /// Optional sweep `start:end:count` for the empirical envelope.
    #[arg(long, value_name = "START:END:COUNT")]
    pub sweep: Option<String>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Meridian interval `a:b` inside the profile domain.
    #[arg(long, default_value = "-1:1", allow_hyphen_values = true)]
    pub interval: String,
    #[arg(long, default_value_t = 401)]
    pub samples: usize,
    #[arg(long, default_value_t = 64)]
    pub n_theta: usize,
    /// Overlay this member's profile.
    #[arg(long)]
    pub s1: Option<f64>,
}

fn fail(code: &str, msg: &str) -> ExitCode {
    let line: String = msg.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error[{code}]: {line}");
    ExitCode::from(2)
}

fn report(e: &LabError) -> ExitCode {
    let line: String = e.detail().split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error[{}]: {line}", e.code());
    ExitCode::from(e.exit_code() as u8)
}

fn configure_threads() -> Result<(), LabError> {
    let Ok(raw) = std::env::var("BUBBLE_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| LabError::InvalidInput(format!("BUBBLE_LAB_THREADS = `{raw}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| LabError::InvalidInput(format!("cannot configure thread pool: {e}")))
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match spec_file::expand(argv) {
        Ok(a) => a,
        Err(e) => return report(&e),
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("bad arguments");
            return fail("invalid-input", first.trim_start_matches("error: "));
        }
    };
    if let Err(e) = configure_threads() {
        return report(&e);
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
