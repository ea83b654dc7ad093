//! `empf`: potential kernels, fields, shape regions and stroke
//! magnetization from the command line.

mod jobs;
mod manifest;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "empf",
    version,
    about = "Electromagnetic potential fields for shape and stroke analysis"
)]
pub struct Cli {
    /// Directory for every artifact of the run (created if missing)
    #[arg(short, long, global = true, default_value = "empf-out")]
    pub output_dir: PathBuf,

    #[command(subcommand)]
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Write potential kernels as EMK1 grids
    Kernel(KernelCmd),
    /// Electric potential of a charge image
    Potential(ImageCmd),
    /// Electric potential and field of a charge image
    Field(ImageCmd),
    /// Regions of interest on the contour of a shape, one JSON report per n
    Roi(RoiCmd),
    /// Thin a stroke image and write the per-pixel orientation as CSV
    Stroke(StrokeCmd),
    /// Magnetize strokes perpendicular to their direction
    Magnetize(MagnetizeCmd),
    /// Repulsion and attraction potentials of a multi-stroke image
    Interact(InteractCmd),
}

#[derive(Debug, Args, Serialize)]
pub struct KernelCmd {
    /// Dimension exponents, comma separated [default: 3]
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Vec<f64>,
    /// Odd kernel extent along every axis
    #[arg(long, default_value_t = 7)]
    pub size: usize,
    /// Number of axes (2 or 3)
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    #[arg(long, value_enum, default_value_t = KindArg::Monopole)]
    pub kind: KindArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    Monopole,
    DipoleX,
    DipoleY,
    /// Real and imaginary parts written as two grids
    Complex,
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    /// 8-bit PGM/PNG image, or an EMK1 grid (2D or 3D)
    pub input: PathBuf,
    /// How intensities become charge
    #[arg(long, value_enum, default_value_t = ModeArg::Binary)]
    pub mode: ModeArg,
    /// Binary mode: intensities at or above this become +1
    #[arg(long, default_value_t = 128.0)]
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Binary,
    Signed,
    Grayscale,
}

#[derive(Debug, Args, Serialize)]
pub struct FieldArgs {
    /// Dimension exponents, comma separated (e.g. 2.3,3,4)
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Vec<f64>,
    /// `auto` (twice the image plus one) or an odd extent for every axis
    #[arg(long, default_value = "auto")]
    pub kernel_size: KernelSizeArg,
    #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
    pub engine: EngineArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineArg {
    Auto,
    Fft,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelSizeArg {
    Auto,
    Extent(usize),
}

impl FromStr for KernelSizeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        match s.parse::<usize>() {
            Ok(e) if e % 2 == 1 => Ok(Self::Extent(e)),
            _ => Err(format!(
                "expected `auto` or an odd positive integer, got {s:?}"
            )),
        }
    }
}

impl fmt::Display for KernelSizeArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Extent(e) => write!(f, "{e}"),
        }
    }
}

impl Serialize for KernelSizeArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Auto => s.serialize_str("auto"),
            Self::Extent(e) => s.serialize_u64(*e as u64),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct RoiCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    /// JSON threshold table replacing the built-in percentile bands
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    /// Region growth along the contour, as a fraction of the largest extent
    #[arg(long, default_value_t = 0.05)]
    pub growth: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ImageCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SmoothingArgs {
    /// Moving-average radius applied to the stroke steps
    #[arg(long, default_value_t = 1)]
    pub smoothing: usize,
    /// Number of moving-average passes
    #[arg(long, default_value_t = 3)]
    pub smoothing_passes: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct StrokeCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub smoothing: SmoothingArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct MagnetizeCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub smoothing: SmoothingArgs,
    /// Substroke ids (as in the stroke CSV) to turn around
    #[arg(long, value_delimiter = ',')]
    pub flip: Vec<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct InteractCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub smoothing: SmoothingArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match jobs::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
