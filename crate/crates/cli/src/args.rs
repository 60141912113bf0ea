use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "liqopt",
    version,
    about = "American put pricing under stochastic liquidity with transaction costs"
)]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Directory for CSV/JSON outputs and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Price one option with the ADI scheme.
    Price(PriceArgs),
    /// Refinement ladders with differences and convergence orders.
    Converge(ConvergeArgs),
    /// ADI against the explicit scheme and Monte Carlo.
    Compare(CompareArgs),
    /// Boundary and price curves over a parameter grid.
    Sweep(SweepArgs),
    /// GBM and liquidity-model MLE over moving windows.
    Calibrate(CalibrateArgs),
    /// Price option quotes with fitted parameters and report RMSE by moneyness.
    Evaluate(EvaluateArgs),
    /// Write synthetic futures and option files drawn from the model.
    GenFixtures(FixtureArgs),
}

/// Model parameters. Any of these may also come from `--config`, but not both.
#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// File of `key=value` lines (model keys plus ns, nl, nt, s_max_mult, l_max).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub theta_bar: Option<f64>,
    #[arg(long)]
    pub sigma_s: Option<f64>,
    #[arg(long)]
    pub sigma_l: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rho3: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Rate inside the mean-reversion level (defaults to `kappa`).
    #[arg(long)]
    pub kappa_theta: Option<f64>,
    #[arg(long)]
    pub strike: Option<f64>,
    #[arg(long)]
    pub maturity: Option<f64>,
}

impl ModelArgs {
    pub fn pairs(&self) -> Vec<(&'static str, f64)> {
        let fields = [
            ("mu", self.mu),
            ("alpha", self.alpha),
            ("theta_bar", self.theta_bar),
            ("sigma_s", self.sigma_s),
            ("sigma_l", self.sigma_l),
            ("beta", self.beta),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("rho3", self.rho3),
            ("lambda", self.lambda),
            ("zeta", self.zeta),
            ("r", self.r),
            ("kappa", self.kappa),
            ("kappa_theta", self.kappa_theta),
            ("strike", self.strike),
            ("maturity", self.maturity),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k, v)))
            .collect()
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct GridArgs {
    #[arg(long)]
    pub ns: Option<usize>,
    #[arg(long)]
    pub nl: Option<usize>,
    /// Number of time levels including `tau = 0`.
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub s_max_mult: Option<f64>,
    #[arg(long)]
    pub l_max: Option<f64>,
}

impl GridArgs {
    pub fn pairs(&self) -> Vec<(&'static str, f64)> {
        let fields = [
            ("ns", self.ns.map(|v| v as f64)),
            ("nl", self.nl.map(|v| v as f64)),
            ("nt", self.nt.map(|v| v as f64)),
            ("s_max_mult", self.s_max_mult),
            ("l_max", self.l_max),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k, v)))
            .collect()
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideArg {
    Holder,
    Writer,
    Both,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum StyleArg {
    American,
    European,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagArg {
    Previous,
    Current,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionArg {
    Tau,
    S,
    L,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeArg {
    Adi,
    Explicit,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessNoiseArg {
    /// Process noise at the filtered mean.
    AtMean,
    /// Adds the filtered variance of L to the local variance.
    Expected,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementArg {
    LogPrice,
    Price,
}

#[derive(Args, Debug)]
pub struct PriceArgs {
    #[arg(long, value_enum, default_value = "both")]
    pub side: SideArg,
    #[arg(long, value_enum, default_value = "american")]
    pub style: StyleArg,
    #[arg(long, default_value_t = 8.0)]
    pub s0: f64,
    #[arg(long, default_value_t = 0.3)]
    pub l0: f64,
    /// Which holder boundary level the writer uses when stepping from n to n+1.
    #[arg(long, value_enum, default_value = "previous")]
    pub writer_lag: LagArg,
    /// Write every time level of the price surface to `surface_<side>.csv`.
    #[arg(long)]
    pub surface: bool,
    /// Write the holder exercise boundary to `boundary.csv`.
    #[arg(long)]
    pub boundary: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    #[arg(long, value_enum, default_value = "tau")]
    pub direction: DirectionArg,
    #[arg(long, value_enum, default_value = "adi")]
    pub scheme: SchemeArg,
    /// Step counts along the refined direction, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub counts: Vec<usize>,
    #[arg(long, value_enum, default_value = "both")]
    pub side: SideArg,
    #[arg(long, default_value_t = 8.0)]
    pub s0: f64,
    #[arg(long, default_value_t = 0.3)]
    pub l0: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long, value_enum, default_value = "american")]
    pub style: StyleArg,
    #[arg(long, value_delimiter = ',', default_value = "8,9,10,11,12")]
    pub s0: Vec<f64>,
    #[arg(long, default_value_t = 0.3)]
    pub l0: f64,
    /// Time levels for the explicit scheme.
    #[arg(long, default_value_t = 50_000)]
    pub explicit_nt: usize,
    #[arg(long)]
    pub no_explicit: bool,
    /// Monte Carlo paths (European style with zero cost only).
    #[arg(long, default_value_t = 400_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 252)]
    pub mc_steps: usize,
    #[arg(long, default_value_t = 20_240_101)]
    pub seed: u64,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Parameter to vary (any model key, e.g. kappa, alpha, beta, theta_bar).
    #[arg(long)]
    pub param: String,
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    pub values: Vec<f64>,
    #[arg(long, default_value_t = 0.3)]
    pub l0: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug)]
pub struct WindowArgs {
    #[arg(long, default_value_t = 762)]
    pub window_len: usize,
    #[arg(long, default_value_t = 5)]
    pub shift: usize,
    #[arg(long, default_value_t = 5)]
    pub windows: usize,
    /// Observation spacing in years.
    #[arg(long, default_value_t = 1.0 / 252.0)]
    pub dt: f64,
    #[arg(long, value_enum, default_value = "log-price")]
    pub measurement: MeasurementArg,
    #[arg(long, value_enum, default_value = "expected")]
    pub process_noise: ProcessNoiseArg,
    /// Estimate lambda and zeta instead of pinning them.
    #[arg(long)]
    pub free_lambda_zeta: bool,
    #[arg(long, default_value_t = 4000)]
    pub max_evals: usize,
    #[arg(long)]
    pub no_std_errors: bool,
}

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub futures: PathBuf,
    #[command(flatten)]
    pub windows: WindowArgs,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub futures: PathBuf,
    #[arg(long)]
    pub options: PathBuf,
    /// Output of `calibrate`; calibrates in place when absent.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[arg(long, default_value_t = 1200)]
    pub min_volume: u64,
    #[command(flatten)]
    pub windows: WindowArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug)]
pub struct FixtureArgs {
    #[arg(long, default_value_t = 20_240_101)]
    pub seed: u64,
    #[arg(long, default_value_t = 782)]
    pub days: usize,
    #[arg(long, default_value_t = 20)]
    pub quote_days: usize,
    /// Relative standard deviation of the quote noise.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
}
