use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "smallball", version, about = "Small-ball probabilities of Green Gaussian processes in weighted L2 norms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues by shooting and by Nyström, side by side.
    Eigs(EigsArgs),
    /// Limit of the probability ratio between two weights from θ-determinants.
    Theta(ThetaArgs),
    /// θ-route ratio against the extrapolated eigenvalue product.
    Compare(CompareArgs),
    /// Sharp small-ball asymptotics on an ε grid.
    Asympt(AsymptArgs),
    /// Saddle-point probabilities on an ε grid.
    Prob(ProbArgs),
    /// Monte Carlo probabilities on an ε grid.
    Mc(McArgs),
    /// Full pipeline checks with a PASS/FAIL summary.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectrumChoice {
    Auto,
    Analytic,
    Shooting,
    Nystrom,
}

#[derive(Debug, Clone, Args)]
pub struct ProcessArgs {
    /// wiener, bridge, ou, slepian, matern, conditional-wiener or bogolyubov.
    #[arg(long)]
    pub process: String,
    /// Number of integrations (index of conditional-wiener).
    #[arg(short = 'm', long = "m")]
    pub m: Option<usize>,
    /// Lower limits of the integrations, e.g. "0,1".
    #[arg(long, value_delimiter = ',')]
    pub betas: Option<Vec<u8>>,
    /// Matérn order.
    #[arg(short = 'n', long = "order", default_value_t = 1)]
    pub order: usize,
    /// Rounds of center-then-integrate before the integrations.
    #[arg(long, default_value_t = 0)]
    pub centerings: usize,
    /// Center once more at the end.
    #[arg(long)]
    pub center_last: bool,
    /// Bogolyubov frequency.
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Bogolyubov covariance as a function of the lag `t`.
    #[arg(long)]
    pub covariance: Option<String>,
    /// Weight ψ(t); give twice to compare two weights.
    #[arg(long = "weight", num_args = 1)]
    pub weights: Vec<String>,
    /// Rescale every weight to ∫ψ^(1/2n) = 1.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    /// Number of eigenvalues.
    #[arg(short = 'K', long = "count")]
    pub count: Option<usize>,
    #[arg(long, value_enum, default_value_t = SpectrumChoice::Auto)]
    pub method: SpectrumChoice,
    /// Nyström grid size (multiple of 16, at least 8K).
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EpsArgs {
    /// Explicit ε values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub eps_start: Option<f64>,
    #[arg(long)]
    pub eps_stop: Option<f64>,
    #[arg(long)]
    pub eps_count: Option<usize>,
    /// Log-spaced grid between start and stop.
    #[arg(long)]
    pub log: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SamplingArgs {
    /// Monte Carlo sample count.
    #[arg(short = 'N', long = "samples")]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EigsArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ThetaArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    #[command(flatten)]
    pub eps: EpsArgs,
    /// Relative tolerance of the product check.
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AsymptArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    #[command(flatten)]
    pub eps: EpsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ProbArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    #[command(flatten)]
    pub eps: EpsArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    #[command(flatten)]
    pub eps: EpsArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    #[command(flatten)]
    pub spectrum: SpectrumArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
