use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use plsmooth::filters::FilterKind;
use plsmooth::Arm;

#[derive(Parser, Debug)]
#[command(
    name = "plsmooth",
    version,
    about = "Piecewise-linear edge-preserving smoothing by filtering gradients and reconstructing",
    allow_negative_numbers = true
)]
pub struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "PLS_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Smooth an image
    #[command(allow_negative_numbers = true)]
    Smooth(SmoothArgs),
    /// Detail enhancement: i + k (i - smooth(i))
    #[command(allow_negative_numbers = true)]
    Enhance(EnhanceArgs),
    /// Tone map an HDR image (.pfm or 16-bit PNG)
    #[command(allow_negative_numbers = true)]
    Tonemap(TonemapArgs),
    /// Denoise a no-flash image guided by a flash image
    #[command(allow_negative_numbers = true)]
    Flashnoflash(FlashArgs),
    /// Gradient reversals of k-times enhancement on the synthetic scan line
    #[command(allow_negative_numbers = true)]
    StudyReversal(ReversalArgs),
    /// Weighted-median quantization cost on a synthetic HDR image
    #[command(allow_negative_numbers = true)]
    StudyBins(BinsArgs),
    /// Data term of piecewise-linear smoothing across beta
    #[command(allow_negative_numbers = true)]
    StudyBeta(BetaArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterChoice {
    Bilateral,
    Dt,
    Wmf,
    L0,
    Guided,
}

impl FilterChoice {
    pub fn kind(self) -> FilterKind {
        match self {
            FilterChoice::Bilateral => FilterKind::Bilateral,
            FilterChoice::Dt => FilterKind::DomainTransform,
            FilterChoice::Wmf => FilterKind::WeightedMedian,
            FilterChoice::L0 => FilterKind::L0,
            FilterChoice::Guided => FilterKind::Guided,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyFilter {
    All,
    Bilateral,
    Dt,
    Wmf,
    L0,
    Guided,
}

impl StudyFilter {
    pub fn kinds(self, all: &[FilterKind]) -> Vec<FilterKind> {
        let one = |c: FilterChoice| vec![c.kind()];
        match self {
            StudyFilter::All => all.to_vec(),
            StudyFilter::Bilateral => one(FilterChoice::Bilateral),
            StudyFilter::Dt => one(FilterChoice::Dt),
            StudyFilter::Wmf => one(FilterChoice::Wmf),
            StudyFilter::L0 => one(FilterChoice::L0),
            StudyFilter::Guided => one(FilterChoice::Guided),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Pc,
    Pl,
    Control,
}

impl Mode {
    pub fn arm(self) -> Arm {
        match self {
            Mode::Pc => Arm::Pc,
            Mode::Pl => Arm::Pl,
            Mode::Control => Arm::Control,
        }
    }
}

/// Filter parameters; unset values take the per-application defaults.
#[derive(Args, Debug, Clone)]
pub struct FilterArgs {
    #[arg(long, value_enum, default_value_t = FilterChoice::Bilateral)]
    pub filter: FilterChoice,
    /// Spatial scale (bilateral, dt)
    #[arg(long)]
    pub sigma_s: Option<f64>,
    /// Range scale (bilateral, dt, wmf)
    #[arg(long)]
    pub sigma_r: Option<f64>,
    /// Window radius (wmf, guided)
    #[arg(long)]
    pub radius: Option<usize>,
    /// Histogram bins (wmf)
    #[arg(long)]
    pub bins: Option<usize>,
    /// Gradient sparsity weight (l0)
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Regularization (guided)
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Iterations (dt)
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Bilateral-grid approximation (bilateral)
    #[arg(long)]
    pub fast: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ModeArgs {
    #[arg(long, value_enum, default_value_t = Mode::Pl)]
    pub mode: Mode,
    /// Gradient weight of the reconstruction (pl and control modes)
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct IoArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Write 16-bit PNG instead of 8-bit
    #[arg(long)]
    pub png16: bool,
}

#[derive(Args, Debug)]
pub struct SmoothArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Guidance image (joint filtering)
    #[arg(long)]
    pub guide: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EnhanceArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Detail gain
    #[arg(short, default_value_t = 5.0)]
    pub k: f64,
}

#[derive(Args, Debug)]
pub struct TonemapArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
    /// Base-layer contrast after compression, as a linear ratio
    #[arg(long, default_value_t = 5.0)]
    pub contrast: f64,
    /// Color saturation exponent in (0, 1]
    #[arg(long, default_value_t = 0.6)]
    pub saturation: f64,
}

#[derive(Args, Debug)]
pub struct FlashArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Flash image guiding the filter
    #[arg(long)]
    pub flash: PathBuf,
    #[command(flatten)]
    pub filter: FilterArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
}

#[derive(Args, Debug)]
pub struct ReversalArgs {
    #[arg(long, value_enum, default_value_t = StudyFilter::All)]
    pub filter: StudyFilter,
    #[arg(short, default_value_t = 2.0)]
    pub k: f64,
    /// Minimum input gradient magnitude counted
    #[arg(long, default_value_t = 0.01)]
    pub tau: f64,
    /// Accepted for uniformity; the scan line is deterministic
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BinsArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Side of the synthetic square image
    #[arg(long, default_value_t = 192)]
    pub size: usize,
    #[arg(long, default_value_t = 8)]
    pub radius: usize,
    #[arg(long, default_value_t = 0.1)]
    pub sigma_r: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [64usize, 256, 1024, 4096])]
    pub bins: Vec<usize>,
    #[arg(long, default_value_t = 16.0)]
    pub beta: f64,
    /// Also emit wall-clock seconds (makes the output non-reproducible)
    #[arg(long)]
    pub timings: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BetaArgs {
    #[arg(long, value_enum, default_value_t = StudyFilter::Bilateral)]
    pub filter: StudyFilter,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0f64, 16.0, 256.0, 1024.0])]
    pub betas: Vec<f64>,
    /// Input image (default: a synthetic scene from --seed)
    #[arg(short, long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
