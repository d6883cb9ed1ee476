mod commands;
mod mmio;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Low-rank Lyapunov and Sylvester solvers with residual-preserving Runge-Kutta steps.
#[derive(Debug, Parser)]
#[command(name = "gramian-rk", version, about)]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Only errors on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve A P + P Aᵀ + B Bᵀ = 0 for a low-rank factor Z with P ≈ Z Zᴴ.
    SolveLyap(LyapArgs),
    /// Solve A Y − Y B = F Gᵀ for factors Ẑ, Γ, Z̆ with Y ≈ Ẑ Γ Z̆ᴴ.
    SolveSylv(SylvArgs),
    /// Check a computed factor against the Lyapunov equation.
    Verify(VerifyArgs),
    /// Compute shift parameters and print them as "re im" lines.
    Shifts(ShiftArgs),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShiftSpec {
    Auto(usize),
    Eig(usize),
    File(PathBuf),
}

impl FromStr for ShiftSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) =
            s.split_once(':').ok_or_else(|| format!("expected auto:N, eig:N or file:PATH, got '{s}'"))?;
        let count = || rest.parse::<usize>().map_err(|_| format!("bad count '{rest}'"));
        match kind {
            "auto" => Ok(ShiftSpec::Auto(count()?)),
            "eig" => Ok(ShiftSpec::Eig(count()?)),
            "file" if !rest.is_empty() => Ok(ShiftSpec::File(PathBuf::from(rest))),
            _ => Err(format!("expected auto:N, eig:N or file:PATH, got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// One-stage Runge-Kutta iteration (or the tableau schedule from --tableau-file).
    Rk,
    /// Low-rank ADI with α = −1/μ.
    Adi,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Relative residual tolerance on ‖h‖²/‖h₀‖².
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_steps: usize,
    /// Arnoldi steps per Ritz run for auto shifts.
    #[arg(long, default_value_t = 20)]
    arnoldi: usize,
    /// Output prefix.
    #[arg(long, default_value = "out")]
    out: String,
}

#[derive(Debug, Args)]
pub struct LyapArgs {
    #[arg(long = "A", value_name = "A.mtx")]
    a: PathBuf,
    #[arg(long = "B", value_name = "B.mtx")]
    b: PathBuf,
    #[arg(long, value_name = "SPEC", required_unless_present = "tableau_file")]
    shifts: Option<ShiftSpec>,
    /// Tableau schedule (tableaus separated by lines containing only '---'), applied in
    /// order and repeated up to --max-steps.
    #[arg(long, conflicts_with = "shifts")]
    tableau_file: Option<PathBuf>,
    /// Keep all iterates real by merging conjugate shift pairs.
    #[arg(long)]
    realify: bool,
    #[arg(long, value_enum, default_value_t = Method::Rk)]
    method: Method,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SylvArgs {
    #[arg(long = "A", value_name = "A.mtx")]
    a: PathBuf,
    #[arg(long = "B", value_name = "B.mtx")]
    b: PathBuf,
    #[arg(long = "F", value_name = "F.mtx")]
    f: PathBuf,
    #[arg(long = "G", value_name = "G.mtx")]
    g: PathBuf,
    /// auto:N and eig:N derive pairs from A and B; file:PATH holds "rê im̂ rĕ im̆" lines.
    #[arg(long, value_name = "SPEC")]
    shifts: ShiftSpec,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long = "A", value_name = "A.mtx")]
    a: PathBuf,
    #[arg(long = "B", value_name = "B.mtx")]
    b: PathBuf,
    #[arg(long = "Z", value_name = "Z.mtx")]
    z: PathBuf,
    /// Residual factor written by solve-lyap; enables the factored-residual check.
    #[arg(long = "h", value_name = "h.mtx")]
    h: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ShiftArgs {
    #[arg(long = "A", value_name = "A.mtx")]
    a: PathBuf,
    #[arg(long, value_name = "SPEC")]
    shifts: ShiftSpec,
    #[arg(long, default_value_t = 20)]
    arnoldi: usize,
    /// Also write the shifts to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet {
        log::LevelFilter::Error
    } else {
        match cli.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            2 => log::LevelFilter::Debug,
            _ => log::LevelFilter::Trace,
        }
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match commands::run(cli.command) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
