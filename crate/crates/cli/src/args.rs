use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Bulk (ensemble-average) quantum computation with thermal inputs.
#[derive(Parser, Debug)]
#[command(name = "bulkq", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format. CSV is a per-site projection of the JSON report.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Worker threads for the parallel scans. Results do not depend on it.
    #[arg(long, default_value_t = 1, global = true)]
    pub threads: usize,

    /// Include wall time in the report. Breaks byte-identical reruns.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Deutsch-Jozsa: decide constant or balanced.
    Dj(DjArgs),
    /// Recover y from the inner-product oracle in one query.
    Parity(ParityArgs),
    /// Worst-case constant/balanced gap over balanced tables.
    Epsilon(EpsilonArgs),
    /// Check that a circuit maps the thermal channel to a proportional one.
    Certify(CertifyArgs),
    /// Run the acceptance criteria.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterArgs {
    /// Number of sites.
    #[arg(long)]
    pub n: usize,

    /// Local dimension q of each site.
    #[arg(long, default_value_t = 2)]
    pub local_dim: usize,

    /// Ground probabilities: a scalar (broadcast) or comma list. For q > 2,
    /// one comma-separated distribution, or one per site separated by ';'.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,

    /// Seed for sampling and readout noise.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseArgs {
    /// Gaussian readout noise per run; enables the noisy simulation.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,

    /// Per-site confidence used to pick the repetition count.
    #[arg(long, default_value_t = 0.977)]
    pub confidence: f64,

    /// Repetition count; overrides the estimate.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<u64>,

    /// Seeded noisy trials for the success rate.
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DjArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub register: RegisterArgs,

    /// Execution model: sqc, bqcp or bqc.
    #[arg(long, default_value = "bqcp")]
    pub model: String,

    /// constant:<v>, ip:<digits>, affine:<digits>:<b>, random-balanced:<seed>, file:<path>.
    #[arg(long)]
    pub oracle: String,

    /// Probability that the ancilla starts in |1> (bqc only); runs the full
    /// register instead of the phase-oracle shortcut.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla_p1: Option<f64>,

    #[command(flatten)]
    #[serde(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub register: RegisterArgs,

    /// Execution model: sqc, bqcp or bqc. Ignored for q > 2.
    #[arg(long, default_value = "bqcp")]
    pub model: String,

    /// Hidden digit string, site 1 first.
    #[arg(long)]
    pub y: String,

    /// Report sites with q_i <= 1/2 instead of failing.
    #[arg(long)]
    pub allow_degenerate: bool,

    #[command(flatten)]
    #[serde(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonArgs {
    #[arg(long)]
    pub n: usize,

    /// Scan every balanced table (n <= 4).
    #[arg(long, conflicts_with = "samples")]
    pub exhaustive: bool,

    /// Scan this many seeded random balanced tables (n <= 12).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertifyModeArg {
    /// Operator identity on every input state.
    Adjoint,
    /// Least-squares fit over a spanning set of input states.
    Pointwise,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub register: RegisterArgs,

    /// Circuit file, `dj:<oracle>` or `random:<seed>`.
    #[arg(long)]
    pub u_circuit: String,

    /// Second circuit for the generalized form V.E = F.U.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_circuit: Option<String>,

    #[arg(long, value_enum, default_value_t = CertifyModeArg::Adjoint)]
    pub mode: CertifyModeArg,

    #[arg(long, default_value_t = bulkq_core::hqa::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestArgs {
    /// Flip the thermal readout sign; the attenuation criterion must fail.
    #[arg(long, hide = true)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inject_sign_flip: bool,
}
