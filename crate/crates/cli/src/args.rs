use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "opennet", version, about = "Signal amplification analysis of directed weighted networks")]
pub struct Cli {
    /// Edge list, one `source target [weight]` per line.
    #[arg(long, global = true, value_name = "PATH")]
    pub network: Option<PathBuf>,

    /// JSON role file `{"inputs": [...], "outputs": [...]}`; every node is an
    /// input and an output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub roles: Option<PathBuf>,

    /// Shift policy. `normalize` moves the spectral abscissa to −1.
    #[arg(long, global = true, value_enum, default_value_t = ShiftArg::Normalize)]
    pub shift: ShiftArg,

    /// Spectral abscissa becomes −MU. Implies `--shift margin`.
    #[arg(long, global = true, value_name = "MU", allow_negative_numbers = true)]
    pub margin: Option<f64>,

    /// Directory receiving `<command>.json` and any CSV artifacts. JSON goes
    /// to stdout when omitted.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Seed for the Monte-Carlo sampler.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftArg {
    Normalize,
    Margin,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase", tag = "name")]
pub enum Command {
    /// H₂-norm with its per input/output pair decomposition.
    H2,
    /// Gramian trace, spectrum and Lyapunov residual.
    Gramian(GramianArgs),
    /// Frequency sweep of one channel.
    Bode(BodeArgs),
    /// Zero-frequency gain of one channel.
    Dcgain(DcgainArgs),
    /// Ranks nodes by their H₂ contribution.
    Rank(RankArgs),
    /// Scores the real input set against random input sets.
    Sample(SampleArgs),
    /// Non-normality, acyclicity and input-to-output hop distances.
    Structure,
    /// Time-domain response to an impulse or a sinusoid.
    Simulate(SimulateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::H2 => "h2",
            Command::Gramian(_) => "gramian",
            Command::Bode(_) => "bode",
            Command::Dcgain(_) => "dcgain",
            Command::Rank(_) => "rank",
            Command::Sample(_) => "sample",
            Command::Structure => "structure",
            Command::Simulate(_) => "simulate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GramianArg {
    Controllability,
    Observability,
}

#[derive(Debug, Args, Serialize)]
pub struct GramianArgs {
    #[arg(long, value_enum, default_value_t = GramianArg::Controllability)]
    pub kind: GramianArg,
}

#[derive(Debug, Args, Serialize)]
pub struct BodeArgs {
    /// Input and output node labels.
    #[arg(long, num_args = 2, value_names = ["IN", "OUT"], required = true)]
    pub pair: Vec<String>,
    /// Defaults to 10⁻³·|a|, with `a` the spectral abscissa.
    #[arg(long)]
    pub omega_min: Option<f64>,
    /// Defaults to 10⁴·|a|.
    #[arg(long)]
    pub omega_max: Option<f64>,
    #[arg(long, default_value_t = opennet::frequency::DEFAULT_SWEEP_POINTS)]
    pub points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct DcgainArgs {
    #[arg(long, num_args = 2, value_names = ["IN", "OUT"], required = true)]
    pub pair: Vec<String>,
    /// Per-path decomposition; requires an acyclic network.
    #[arg(long)]
    pub paths: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SideArg {
    Input,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionArg {
    Max,
    Min,
}

#[derive(Debug, Args, Serialize)]
pub struct RankArgs {
    #[arg(long, value_enum)]
    pub side: SideArg,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = DirectionArg::Max)]
    pub direction: DirectionArg,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    /// Size of the random input sets; must equal the number of real inputs.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Role file naming the real inputs; defaults to the network's inputs.
    #[arg(long, value_name = "PATH")]
    pub real_inputs: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub p_threshold: f64,
    #[arg(long, default_value_t = 2.0)]
    pub z_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Impulse,
    Sin,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Angular frequency for `--kind sin`.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub horizon: f64,
    /// Defaults to 0.05/max(|a|, ‖A‖_F), further capped at a fortieth of the
    /// period for `--kind sin`.
    #[arg(long)]
    pub step: Option<f64>,
    /// Label of the driven input; defaults to the first input.
    #[arg(long, value_name = "LABEL")]
    pub input: Option<String>,
}
