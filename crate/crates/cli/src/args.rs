use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "ccbell", version, about = "Contextual hidden-variable simulations of Bell correlations")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Base seed for every random stream
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of trials (per context / per stage)
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Also write the JSON report to this path
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Format written to stdout
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Leave the timestamp out of the manifest
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// JSON config file (keys mirror flag names); a previous report works too
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for the Monte Carlo engines (results do not depend on it)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form quantum and subquantum correlations
    SpinCorrelation(SpinArgs),
    /// Monte Carlo run of the spin model
    McRun(McArgs),
    /// Colored-ball experiment
    BallProtocol(BallArgs),
    /// Common-cause conditions for a binary-event model
    CommonCause(CommonCauseArgs),
    /// CHSH combination of the model's correlations
    Chsh(ChshArgs),
}

#[derive(Args, Debug, Default)]
pub struct SpinArgs {
    /// Angle between the axes, e.g. 60deg (repeatable, comma separated)
    #[arg(long, value_delimiter = ',')]
    pub phi: Vec<String>,
    /// Inclusive sweep start:stop:step<unit>, e.g. 0:180:5deg
    #[arg(long)]
    pub sweep: Option<String>,
    /// Two-column (phi_rad, C) data file for the sweep
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescriptionChoice {
    Alice,
    Bob,
    Both,
}

#[derive(Args, Debug, Default)]
pub struct McArgs {
    /// Alice's axis
    #[arg(long)]
    pub axis_a: Option<String>,
    /// Angle from Alice's axis to Bob's
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long, value_enum)]
    pub description: Option<DescriptionChoice>,
    /// Per-trial CSV (trial, lambda_sign, outcome1, outcome2)
    #[arg(long)]
    pub records: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct BallArgs {
    #[arg(long)]
    pub stage: Option<u8>,
    /// Run stages 1-3 with default filters and check the Bell-type inequality
    #[arg(long)]
    pub all_stages: bool,
    #[arg(long)]
    pub alice_filter: Option<String>,
    #[arg(long)]
    pub bob_filter: Option<String>,
    #[arg(long)]
    pub p_stage1: Option<f64>,
    #[arg(long)]
    pub p_stage23: Option<f64>,
    /// Per-trial probability that an observer tunes to its other color
    #[arg(long)]
    pub mismatch_prob: Option<f64>,
    /// Per-trial CSV (one file per stage with --all-stages)
    #[arg(long)]
    pub records: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Spin,
    Ball,
}

#[derive(Args, Debug, Default)]
pub struct CommonCauseArgs {
    #[arg(long, value_enum, conflicts_with = "model")]
    pub builtin: Option<Builtin>,
    /// JSON model {p_z, joint_given_z, joint_given_not_z}
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Spin model: angle between the axes
    #[arg(long)]
    pub phi: Option<String>,
    /// Ball model: stage
    #[arg(long)]
    pub stage: Option<u8>,
    #[arg(long)]
    pub p_stage1: Option<f64>,
    #[arg(long)]
    pub p_stage23: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChshModeChoice {
    Analytic,
    Empirical,
    Both,
}

#[derive(Args, Debug, Default)]
pub struct ChshArgs {
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub a_prime: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long)]
    pub b_prime: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<ChshModeChoice>,
}
