use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "spinwalk",
    version,
    about = "Wave packets whose velocity follows a precessing spin",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Position densities at a list of times, one CSV per time.
    Density(DensityArgs),
    /// Spin polarisation, mean position and width against time, or an
    /// alpha sweep of the long-time quantities.
    Observables(ObservablesArgs),
    /// Shannon entropy of the density against time.
    Entropy(EntropyArgs),
    /// Discrete Hadamard walk, optionally compared with the continuum.
    Qrw(QrwArgs),
    /// Runs the acceptance checks and prints a JSON report.
    Validate(ValidateArgs),
}

/// Model parameters: either `--alpha` (with `σ = v = 1` unless given) or
/// `--omega`.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Dimensionless coupling σω/v.
    #[arg(long, conflicts_with = "omega")]
    pub alpha: Option<f64>,
    /// Precession frequency.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Velocity scale.
    #[arg(long, default_value_t = 1.0)]
    pub v: f64,
    /// Initial packet width.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SpinArgs {
    /// Initial spin state: z_plus, z_minus, y_plus or custom.
    #[arg(long, default_value = "y_plus")]
    pub spin: String,
    /// Twice the spin quantum number.
    #[arg(long, default_value_t = 1)]
    pub twice_j: u32,
    /// Coefficients for `--spin custom`, ascending in M, as `re:im` pairs
    /// separated by commas.
    #[arg(long)]
    pub coeffs: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Flat `key = value` file with defaults for any flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for the output files.
    #[arg(long, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Auto,
    Quadrature,
    Fft,
    SmallAlpha,
    LargeAlpha,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// FFT grid size (power of two); chosen from the time when absent.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// FFT momentum cutoff in units of 1/σ.
    #[arg(long, default_value_t = 16.0)]
    pub p_max: f64,
    /// Half width of the quadrature x grid in units of σ; defaults to
    /// vt/2σ + 10.
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Quadrature x grid density.
    #[arg(long, default_value_t = 8.0)]
    pub points_per_sigma: f64,
    /// Absolute error target of the quadrature route.
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub spin: SpinArgs,
    /// Comma-separated times; suffix `T` for precession periods, `F` for
    /// flight times σ/v, none for raw time.
    #[arg(long, required = true, value_delimiter = ',')]
    pub times: Vec<String>,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    All,
    Eta,
    MeanX,
    Dx,
    #[value(name = "V")]
    V,
}

#[derive(Debug, Clone, Args)]
pub struct ObservablesArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// End of the time series.
    #[arg(long)]
    pub tmax: Option<String>,
    /// Time step of the series.
    #[arg(long)]
    pub dt: Option<String>,
    #[arg(long, value_enum, default_value_t = Quantity::All)]
    pub quantity: Quantity,
    /// Twice the spin quantum number for the width.
    #[arg(long, default_value_t = 1)]
    pub twice_j: u32,
    /// Twice the initial `J_z` eigenvalue.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub twice_m: i32,
    /// Sweep `lo:hi:log|lin:count` over alpha, writing (alpha, eta_bar, V).
    #[arg(long)]
    pub sweep_alpha: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub spin: SpinArgs,
    /// Comma-separated times, as for `density`.
    #[arg(long, required = true, value_delimiter = ',')]
    pub times: Vec<String>,
    #[arg(long, value_enum, default_value_t = Method::Fft)]
    pub method: Method,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct QrwArgs {
    /// Number of walk steps.
    #[arg(long)]
    pub steps: usize,
    /// Initial coin: z_plus, z_minus, y_plus or custom.
    #[arg(long, default_value = "y_plus")]
    pub coin: String,
    /// Coefficients for `--coin custom`, as `re:im` pairs (M = -1/2 first).
    #[arg(long)]
    pub coeffs: Option<String>,
    /// Also compare with the continuum density.
    #[arg(long)]
    pub compare: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Physical time of the comparison; defaults to one flight time σ/v per
    /// step.
    #[arg(long)]
    pub time: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Replaces every tolerance; 0 gives a negative control.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Runs only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<usize>,
    /// Writes the JSON report here instead of standard output.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}
