//! Execution models and algorithm pipelines.
//!
//! Every pipeline here is the Fourier sandwich `DFT^{-1} . U_f . DFT` on an
//! `n`-site register (for qubits, `H U_f H`, i.e. Deutsch-Jozsa / parity with
//! the pure ancilla absorbed into a diagonal phase oracle). The three
//! execution models differ in how the register is prepared and read out;
//! they live behind [`ExecutionModel`] in a name-keyed [`ModelRegistry`].

mod dj;
mod noise;
mod parity;
mod registry;

pub use dj::{
    decide_dj, dj_spectrum, fold_final_branches, run_dj, run_dj_state, run_dj_thermal_ancilla,
    sample_outcomes, signals_from_spectrum, thermal_signals, thermal_signals_with, Decision,
    Verdict,
};
pub use noise::{
    dj_trial_success_rate, estimate_repetitions, parity_trial_success_rate, repetitions_unrounded,
    simulate_readout, simulate_readout_trial, z_from_confidence, NoiseConfig,
};
pub use parity::{run_parity, run_qudit_parity, ParityOutcome, QuditParityOutcome};
pub use registry::{
    ExecutionModel, ModelOutput, ModelRegistry, PureEnsemble, RunContext, SampledOutcome,
    StandardSampling, ThermalEnsemble,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::ThermalSpec;

/// Branch-enumeration guard on `n` for qubit thermal ensembles.
pub const MIXTURE_MAX_SITES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    /// Pure input, one projective single-shot measurement.
    #[serde(rename = "sqc")]
    Sqc,
    /// Pure `|0...0>` input, ensemble-averaged site signals.
    #[serde(rename = "bqcp")]
    BqcP,
    /// Thermal product input, ensemble-averaged site signals.
    #[serde(rename = "bqc")]
    Bqc,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Sqc, ModelKind::BqcP, ModelKind::Bqc];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Sqc => "sqc",
            ModelKind::BqcP => "bqcp",
            ModelKind::Bqc => "bqc",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Domain(format!("unknown model '{s}' (expected sqc, bqcp, bqc)")))
    }
}

/// Ensemble-averaged readout of one run.
///
/// Qubit registers fill `signals` with `<sigma_z>` per site (eigenvalue -1
/// on `|0>`). Registers with `q > 2` fill `phase_moments[site][m - 1]` with
/// `<Z_q^m>` for `m = 1..q-1` instead.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalReport {
    pub model: ModelKind,
    pub local_dim: usize,
    pub sites: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub signals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phase_moments: Vec<Vec<Complex64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal: Option<ThermalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla_p1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
}

impl SignalReport {
    pub(crate) fn qubit(model: ModelKind, signals: Vec<f64>, thermal: Option<ThermalSpec>) -> Self {
        Self {
            model,
            local_dim: 2,
            sites: signals.len(),
            signals,
            phase_moments: Vec::new(),
            thermal,
            ancilla_p1: None,
            seed: None,
            noise: None,
        }
    }

    /// Largest `|E_i|` (qubits) or `|<Z_q^m>|` (qudits).
    pub fn max_magnitude(&self) -> f64 {
        let a = self.signals.iter().map(|e| e.abs()).fold(0.0, f64::max);
        let b = self
            .phase_moments
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        a.max(b)
    }
}

pub(crate) fn require_qubits(local_dim: usize) -> Result<()> {
    if local_dim != 2 {
        return Err(Error::QubitOnly(local_dim));
    }
    Ok(())
}

pub(crate) fn check_thermal_shape(thermal: &ThermalSpec, local_dim: usize, sites: usize) -> Result<()> {
    if thermal.local_dim() != local_dim || thermal.sites() != sites {
        return Err(Error::DimensionMismatch {
            expected: sites,
            actual: thermal.sites(),
        });
    }
    Ok(())
}
