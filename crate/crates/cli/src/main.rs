mod commands;
mod parse;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isoval_core::IsovalError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "isoval", version, about = "Zonal Minkowski valuations and their isoperimetric inequalities")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Sphere grid level (n = 3: 2L × 4L nodes)
    #[arg(long, global = true, env = "ISOVAL_GRID_LEVEL", default_value_t = isoval_core::sphere_quad::DEFAULT_LEVEL)]
    pub grid_level: usize,
    /// Worker threads (default: all cores); output does not depend on it
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for every random choice
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Support-field statistics, polar volumes and volume products of Π, Π_p, Φ^μ, Φ_p^μ
    Compute(ComputeArgs),
    /// Seeded fuzzing of one inequality; exit code 1 on any violation
    Verify(VerifyArgs),
    /// Sobolev-type inequalities for characteristic or gridded functions
    Sobolev {
        #[command(subcommand)]
        which: SobolevCommand,
    },
    /// Local ascent of the volume product from a starting body
    Extremize(ExtremizeArgs),
    /// Export the sphere grid as CSV rows u1,u2,u3,w
    Grid,
}

#[derive(Args, Debug)]
pub struct ComputeArgs {
    #[arg(long)]
    pub body: String,
    #[arg(long)]
    pub measure: String,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// thm1, thm2, thm51, thm52, lemma41 or affine
    pub theorem: String,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Fixed body instead of random hulls
    #[arg(long)]
    pub body: Option<String>,
    /// Single measure instead of the standard set (renormalised per check)
    #[arg(long)]
    pub measure: Option<String>,
    /// Single exponent instead of 1, 1.5, 2
    #[arg(long)]
    pub p: Option<f64>,
    /// Vertices per random hull
    #[arg(long, default_value_t = 20)]
    pub vertices: usize,
}

#[derive(Subcommand, Debug)]
pub enum SobolevCommand {
    /// BV inequality for the characteristic function of a body
    Char {
        #[arg(long)]
        body: String,
        #[arg(long)]
        measure: String,
    },
    /// L_p inequality for a profile or raster on a cubic grid
    Grid(SobolevGridArgs),
}

#[derive(Args, Debug)]
pub struct SobolevGridArgs {
    /// gaussian, aubin-talenti or bump
    #[arg(long, default_value = "aubin-talenti")]
    pub profile: String,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long)]
    pub measure: String,
    /// Grid points per axis
    #[arg(long, default_value_t = 96)]
    pub points: usize,
    /// Half-width of the box [−a, a]³
    #[arg(long = "box", default_value_t = 10.0)]
    pub half_width: f64,
    /// Profile is sampled at scale·x (default 2 for aubin-talenti, 1 otherwise)
    #[arg(long)]
    pub scale: Option<f64>,
    /// Read the function from a raster file instead of sampling a profile
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Also write the sampled function as a raster file
    #[arg(long)]
    pub save: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExtremizeArgs {
    #[arg(long)]
    pub measure: String,
    #[arg(long, default_value = "ellipsoid:2,1,0.5")]
    pub start: String,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
}

/// Why a run did not finish cleanly.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0} violation(s)")]
    Violations(usize),
    #[error(transparent)]
    Core(#[from] IsovalError),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Violations(_) => 1,
            Failure::Core(e) if e.is_spec_error() => 2,
            Failure::Core(_) => 3,
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(j) = cli.common.jobs {
        if j == 0 {
            return Err(IsovalError::InvalidParameter("--jobs must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| IsovalError::InvalidParameter(e.to_string()))?;
    }
    let c = &cli.common;
    match &cli.command {
        Command::Compute(a) => commands::compute(c, a),
        Command::Verify(a) => commands::verify(c, a),
        Command::Sobolev { which: SobolevCommand::Char { body, measure } } => commands::sobolev_char(c, body, measure),
        Command::Sobolev { which: SobolevCommand::Grid(a) } => commands::sobolev_grid(c, a),
        Command::Extremize(a) => commands::extremize(c, a),
        Command::Grid => commands::grid_export(c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("isoval: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Violations(3).exit_code(), 1);
        assert_eq!(Failure::from(IsovalError::Parse("x".into())).exit_code(), 2);
        assert_eq!(Failure::from(IsovalError::InvalidParameter("x".into())).exit_code(), 2);
        assert_eq!(Failure::from(IsovalError::NonFinite("x".into())).exit_code(), 3);
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from(["isoval", "verify", "thm1", "--seed", "4", "--jobs", "2", "--format", "csv"]).unwrap();
        assert_eq!(cli.common.seed, 4);
        assert_eq!(cli.common.jobs, Some(2));
        assert_eq!(cli.common.format, Some(Format::Csv));
        assert!(Cli::try_parse_from(["isoval", "compute", "--body", "cube"]).is_err());
    }
}
