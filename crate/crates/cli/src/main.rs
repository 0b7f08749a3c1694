//! `gapmps`: maximal Poisson-disk sampling, mesh optimization and analysis
//! from the command line.
//!
//! Exit codes: 0 success, 2 bad input or configuration, 3 internal
//! invariant violation, 4 optimization did not converge (best state written).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    /// A required flag is missing; usage is printed with the message.
    Usage(String),
    Runtime(String),
    NotConverged(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::NotConverged(_) => 4,
        }
    }
}

impl From<gapmps::Error> for CliError {
    fn from(e: gapmps::Error) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

macro_rules! core_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                gapmps::Error::from(e).into()
            }
        }
    )*};
}
core_error!(
    gapmps::sampler::SampleError,
    gapmps::optimize::OptimizeError,
    gapmps::analysis::AnalysisError,
    gapmps::gap::GapError,
    gapmps::io::IoError
);

#[derive(Parser, Debug)]
#[command(name = "gapmps", version, about = "Maximal Poisson-disk sampling via gap primitives")]
pub struct Cli {
    /// Worker threads for gap filling and spectra (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print per-stage wall-clock times to stderr.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a maximal sample set.
    Sample(SampleArgs),
    /// Remove and refill vertices until the mesh meets valence/angle/edge targets.
    Optimize(OptimizeArgs),
    /// Mesh statistics of one or more points files.
    Stats(StatsArgs),
    /// Radial power spectrum of periodic point sets.
    Spectrum(SpectrumArgs),
    /// Gap counts after dart throwing.
    Census(CensusArgs),
    /// Render a points file to SVG.
    Svg(SvgArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct SourceArgs {
    /// JSON run configuration; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `periodic`, `box`, or `polygon FILE`.
    #[arg(long, num_args = 1..=2, value_names = ["KIND", "FILE"])]
    domain: Option<Vec<String>>,
    /// `uniform V`, `grid FILE.pgm`, or `expr STR`.
    #[arg(long, num_args = 2, value_names = ["KIND", "ARG"])]
    density: Option<Vec<String>>,
    /// Density range mapped onto black..white of a PGM density.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    density_range: Option<Vec<f64>>,
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Consecutive dart misses before switching to gap filling.
    #[arg(long)]
    k_reject: Option<usize>,
    #[arg(long)]
    max_fill_iterations: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Stop after dart throwing (the set is not maximal).
    #[arg(long)]
    dart_only: bool,
    /// Points file (`x y r` per line).
    #[arg(long)]
    out: PathBuf,
    /// Stats JSON (default: OUT with extension `.json`).
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Also write the resolved run configuration as JSON.
    #[arg(long)]
    save_config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Valence,
    Angle,
    Edge,
    Joint,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    /// Points file to optimize; without it a sample is generated from the source flags.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_enum, default_value = "joint")]
    mode: ModeArg,
    #[arg(long, default_value_t = 30.0)]
    theta_lo: f64,
    #[arg(long, default_value_t = 120.0)]
    theta_hi: f64,
    /// Edge-length factor: an edge offends when longer than `lambda (r_i + r_j)`.
    #[arg(long)]
    lambda_e: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    max_interleaves: Option<usize>,
    /// Optimized points file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mesh output; `.off` writes OFF, anything else OBJ.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Before/after stats and the optimization report as JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Points files.
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Domain override when a file has no config header.
    #[arg(long, num_args = 1..=2, value_names = ["KIND", "FILE"])]
    domain: Option<Vec<String>>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Reference radius for edge/area ratios (default: from the header or the smallest radius).
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 512)]
    grid: usize,
    /// CSV output (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG line plot of radial power.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    /// Count gaps of an existing points file instead of a fresh dart throw.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SvgArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, num_args = 1..=2, value_names = ["KIND", "FILE"])]
    domain: Option<Vec<String>>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 800.0)]
    size: f64,
    #[arg(long)]
    mesh: bool,
    #[arg(long)]
    valence: bool,
    #[arg(long)]
    no_disks: bool,
    #[arg(long)]
    no_gaps: bool,
    #[arg(long)]
    no_centers: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let result = match &cli.command {
        Command::Sample(a) => commands::sample(a, cli.timing),
        Command::Optimize(a) => commands::optimize(a, cli.timing),
        Command::Stats(a) => commands::stats(a),
        Command::Spectrum(a) => commands::spectrum(a, cli.timing),
        Command::Census(a) => commands::census(a),
        Command::Svg(a) => commands::svg(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Config(m) => eprintln!("error: {m}"),
                CliError::Usage(m) => {
                    use clap::CommandFactory;
                    eprintln!("error: {m}\n\n{}", Cli::command().render_usage());
                }
                CliError::Runtime(m) => eprintln!("internal error: {m}"),
                CliError::NotConverged(m) => eprintln!("NotConverged: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
