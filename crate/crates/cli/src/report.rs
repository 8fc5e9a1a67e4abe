use serde::{Deserialize, Serialize};

use bulkq_core::acceptance::SuiteReport;
use bulkq_core::analysis::{self, EpsilonReport};
use bulkq_core::hqa::{self, ProportionalityReport};
use bulkq_core::models::{
    Decision, ModelOutput, NoiseConfig, ParityOutcome, QuditParityOutcome, SignalReport, Verdict,
    MIXTURE_MAX_SITES,
};
use bulkq_core::oracle::{PromiseClass, ENUMERATION_MAX_ARITY};
use bulkq_core::qcore::{self, ThermalSpec};

use crate::args::{Command, Format};

pub const SCHEMA: &str = "bulkq.report.v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub schema: String,
    pub tool: String,
    pub version: String,
    pub request: Request,
    pub guards: Guards,
    pub tolerances: Tolerances,
    pub result: CommandResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub format: Format,
    pub threads: usize,
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Guards {
    pub dense_dim: usize,
    pub dense_dim_default: usize,
    /// Set when the dense guard came from the environment.
    pub dense_dim_env: Option<String>,
    pub state_dim: usize,
    pub mixture_max_sites: usize,
    pub exhaustive_max_sites: usize,
    pub sampled_max_sites: usize,
}

impl Guards {
    pub fn current() -> Self {
        Self {
            dense_dim: qcore::dense_guard(),
            dense_dim_default: qcore::DEFAULT_DENSE_GUARD,
            dense_dim_env: qcore::dense_guard_overridden().then(|| qcore::DENSE_GUARD_ENV.to_string()),
            state_dim: qcore::STATE_GUARD,
            mixture_max_sites: MIXTURE_MAX_SITES,
            exhaustive_max_sites: ENUMERATION_MAX_ARITY,
            sampled_max_sites: analysis::SAMPLED_MAX_SITES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub identity: f64,
    pub normalization: f64,
    pub state_norm: f64,
    pub gate_unitarity: f64,
    pub unitary: f64,
    pub density: f64,
    pub certify_default: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: analysis::IDENTITY_TOL,
            normalization: analysis::NORMALIZATION_TOL,
            state_norm: qcore::NORM_TOL,
            gate_unitarity: qcore::GATE_UNITARITY_TOL,
            unitary: hqa::UNITARY_TOL,
            density: hqa::DENSITY_TOL,
            certify_default: hqa::DEFAULT_TOLERANCE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum CommandResult {
    Dj(DjResult),
    Parity(ParityResult),
    Epsilon(EpsilonResult),
    Certify(CertifyResult),
    Selftest(SuiteReport),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DjResult {
    /// Truth table, one digit per basis index.
    pub table: String,
    pub promise: PromiseClass,
    pub verdict: Verdict,
    pub output: ModelOutput,
    /// Threshold rule applied to ensemble signals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<Decision>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSummary>,
}

/// Readout noise averaged over `repetitions` runs. `noisy` and
/// `noisy_decision` are trial 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSummary {
    pub config: NoiseConfig,
    pub z: f64,
    /// Whether `repetitions` came from the estimate or from `--reps`.
    pub estimated: bool,
    pub trials: u64,
    /// Absent when the table is neither constant nor balanced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success_rate: Option<f64>,
    pub noisy: SignalReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noisy_decision: Option<Decision>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noisy_recovered: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityResult {
    pub y: String,
    pub recovered: String,
    pub correct: bool,
    pub queries: u32,
    pub outcome: ParityPayload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "register", rename_all = "lowercase")]
pub enum ParityPayload {
    Qubit(ParityOutcome),
    Qudit(QuditParityOutcome),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonResult {
    pub argmin: String,
    /// True for sampled scans: the minimum over a sample bounds the true
    /// worst case from above.
    pub upper_bound_only: bool,
    pub report: EpsilonReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyResult {
    /// `conjugated` for F = U E U^dagger, `generalized` for F = V E U^dagger.
    pub form: String,
    pub thermal: ThermalSpec,
    pub report: ProportionalityReport,
}

#[derive(Serialize)]
struct SiteRow {
    site: usize,
    ground_probability: Option<f64>,
    signal: Option<f64>,
    threshold: Option<f64>,
    noisy_signal: Option<f64>,
    y: Option<usize>,
    recovered: Option<usize>,
    margin: Option<f64>,
    degenerate: Option<bool>,
    population: Option<f64>,
}

impl SiteRow {
    fn new(site: usize) -> Self {
        Self {
            site: site + 1,
            ground_probability: None,
            signal: None,
            threshold: None,
            noisy_signal: None,
            y: None,
            recovered: None,
            margin: None,
            degenerate: None,
            population: None,
        }
    }
}

#[derive(Serialize)]
struct EpsilonRow<'a> {
    n: usize,
    epsilon: f64,
    bound_2_over_n: f64,
    tables_scanned: usize,
    argmin_index: usize,
    argmin: &'a str,
    upper_bound_only: bool,
}

#[derive(Serialize)]
struct ObservableRow<'a> {
    label: &'a str,
    constant_re: f64,
    constant_im: f64,
    magnitude: f64,
    residual: f64,
    pass: bool,
}

#[derive(Serialize)]
struct CriterionRow<'a> {
    id: u8,
    name: &'a str,
    pass: bool,
    detail: &'a str,
}

fn ground(thermal: Option<&ThermalSpec>, site: usize) -> Option<f64> {
    thermal.map(|t| t.site_distributions()[site][0])
}

/// CSV projection: one row per site for signal reports, per observable for
/// certification, per criterion for the self-test.
pub fn to_csv(result: &CommandResult) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match result {
        CommandResult::Dj(r) => match &r.output {
            ModelOutput::Sampled(s) => {
                for (i, &d) in s.outcome.iter().enumerate() {
                    w.serialize(SiteRow {
                        recovered: Some(d),
                        ..SiteRow::new(i)
                    })?;
                }
            }
            ModelOutput::Signals(s) => {
                for (i, &e) in s.signals.iter().enumerate() {
                    w.serialize(SiteRow {
                        ground_probability: ground(s.thermal.as_ref(), i),
                        signal: Some(e),
                        threshold: r.decision.as_ref().map(|d| d.thresholds[i]),
                        noisy_signal: r.noise.as_ref().map(|n| n.noisy.signals[i]),
                        ..SiteRow::new(i)
                    })?;
                }
            }
        },
        CommandResult::Parity(r) => {
            let y: Vec<usize> = r.y.chars().map(|c| c.to_digit(36).unwrap_or(0) as usize).collect();
            match &r.outcome {
                ParityPayload::Qubit(p) => {
                    let signals = p.output.signals();
                    for (i, &d) in p.recovered.iter().enumerate() {
                        w.serialize(SiteRow {
                            ground_probability: signals.and_then(|s| ground(s.thermal.as_ref(), i)),
                            signal: signals.map(|s| s.signals[i]),
                            noisy_signal: r.noise.as_ref().map(|n| n.noisy.signals[i]),
                            y: Some(y[i]),
                            recovered: Some(d),
                            margin: Some(p.margins[i]),
                            degenerate: Some(p.degenerate_sites.contains(&i)),
                            ..SiteRow::new(i)
                        })?;
                    }
                }
                ParityPayload::Qudit(p) => {
                    for (i, &d) in p.recovered.iter().enumerate() {
                        w.serialize(SiteRow {
                            y: Some(y[i]),
                            recovered: Some(d),
                            population: Some(p.populations[i][d]),
                            ..SiteRow::new(i)
                        })?;
                    }
                }
            }
        }
        CommandResult::Epsilon(r) => w.serialize(EpsilonRow {
            n: r.report.n,
            epsilon: r.report.epsilon,
            bound_2_over_n: r.report.bound_2_over_n,
            tables_scanned: r.report.tables_scanned,
            argmin_index: r.report.argmin_index,
            argmin: &r.argmin,
            upper_bound_only: r.upper_bound_only,
        })?,
        CommandResult::Certify(r) => {
            for o in &r.report.observables {
                w.serialize(ObservableRow {
                    label: &o.label,
                    constant_re: o.constant.re,
                    constant_im: o.constant.im,
                    magnitude: o.magnitude,
                    residual: o.residual,
                    pass: o.pass,
                })?;
            }
        }
        CommandResult::Selftest(r) => {
            for c in &r.criteria {
                w.serialize(CriterionRow {
                    id: c.id,
                    name: &c.name,
                    pass: c.pass,
                    detail: &c.detail,
                })?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
