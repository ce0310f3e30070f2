use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use homodyne_core::experiments::{Panel, SampleProtocol, SweepProtocol};

#[derive(Parser, Debug)]
#[command(
    name = "homodyne",
    version,
    about = "Spin-ensemble state preparation by cavity-assisted homodyne measurement"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Superposition-state tables: P(m) per χ_x (a), per X_L (b), fidelity vs χ_x (c).
    Fig2(FigArgs),
    /// Dicke squeezing: ξ_D vs P_L (a), vs χ_p (b), saturated ξ_D vs N (c).
    Fig3(FigArgs),
    /// Repetitive measurement: ξ_D vs P_L (a), vs χ_p (b), vs round count (c).
    Fig4(FigArgs),
    /// Intracavity photon and strength bounds for a cavity and probe pulse.
    Feasibility(FeasibilityArgs),
    /// Monte-Carlo outcomes of a single measurement on a coherent spin state.
    Sample(SampleArgs),
    /// Generic one-parameter sweep of a preparation protocol.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
pub struct FigArgs {
    #[arg(value_parser = parse_panel)]
    pub panel: Panel,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(value_parser = parse_sample_protocol)]
    pub protocol: SampleProtocol,
    /// Number of shots.
    #[arg(long, alias = "n-shots", env = "HOMODYNE_SHOTS")]
    pub shots: Option<usize>,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// superposition, dss, repetitive or repetitive_sampled.
    #[arg(long, value_parser = parse_sweep_protocol)]
    pub protocol: SweepProtocol,
    /// Swept parameter (N, chi_x, chi_p, outcome, eta or n depending on protocol).
    #[arg(long)]
    pub param: String,
    #[arg(long, allow_negative_numbers = true)]
    pub start: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub stop: f64,
    #[arg(long)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = ScaleArg::Linear)]
    pub scale: ScaleArg,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct FeasibilityArgs {
    /// Atom-cavity coupling g in units of 2π·MHz.
    #[arg(long, env = "HOMODYNE_G")]
    pub g: Option<f64>,
    /// Detuning Δ in units of 2π·MHz.
    #[arg(long, env = "HOMODYNE_DELTA", allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Cavity decay rate κ in units of 2π·MHz.
    #[arg(long, env = "HOMODYNE_KAPPA")]
    pub kappa: Option<f64>,
    /// Mean probe photon number N_p.
    #[arg(long, env = "HOMODYNE_NP")]
    pub np: Option<f64>,
    /// Pulse stretch factor; values above 1 select the long exponential probe.
    #[arg(long = "n-t", alias = "n_t", env = "HOMODYNE_N_T")]
    pub n_t: Option<f64>,
    /// Measurement rounds for the long-pulse plan.
    #[arg(long = "n", env = "HOMODYNE_ROUNDS")]
    pub rounds: Option<usize>,
    /// Photon-ratio threshold for the dispersive condition.
    #[arg(long, env = "HOMODYNE_THRESHOLD")]
    pub threshold: Option<f64>,
    #[arg(long, value_enum, default_value_t = PulseArg::Exponential)]
    pub pulse: PulseArg,
    /// Also write the sampled pulse and response functions as CSV.
    #[arg(long, value_name = "PATH")]
    pub pulse_csv: Option<PathBuf>,
    #[arg(long, env = "HOMODYNE_CONFIG", value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, env = "HOMODYNE_OUT", value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Physics overrides shared by the table-producing subcommands.
#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// Atom number N.
    #[arg(long = "N", env = "HOMODYNE_N", value_name = "ATOMS")]
    pub atoms: Option<usize>,
    #[arg(long, env = "HOMODYNE_CHI_X")]
    pub chi_x: Option<f64>,
    #[arg(long, env = "HOMODYNE_CHI_P")]
    pub chi_p: Option<f64>,
    #[arg(long, env = "HOMODYNE_ETA", allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Measurement outcome (X_L or P_L).
    #[arg(long, env = "HOMODYNE_OUTCOME", allow_negative_numbers = true)]
    pub outcome: Option<f64>,
    /// Number of repeated measurement rounds.
    #[arg(long = "n", env = "HOMODYNE_ROUNDS", value_name = "ROUNDS")]
    pub rounds: Option<usize>,
    #[arg(long, env = "HOMODYNE_SEED")]
    pub seed: Option<u64>,
    /// Evaluate grid points on one thread.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Args, Debug, Default)]
pub struct OutputArgs {
    /// TOML file with default values; environment and flags take precedence.
    #[arg(long, env = "HOMODYNE_CONFIG", value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, env = "HOMODYNE_OUT", value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, env = "HOMODYNE_FORMAT")]
    pub format: Option<FormatArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PulseArg {
    Exponential,
    OptimalX,
}

fn parse_panel(s: &str) -> Result<Panel, String> {
    s.parse().map_err(|e: homodyne_core::Error| e.to_string())
}

fn parse_sample_protocol(s: &str) -> Result<SampleProtocol, String> {
    s.parse().map_err(|e: homodyne_core::Error| e.to_string())
}

fn parse_sweep_protocol(s: &str) -> Result<SweepProtocol, String> {
    s.parse().map_err(|e: homodyne_core::Error| e.to_string())
}
