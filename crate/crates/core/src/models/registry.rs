use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dj::{fold_final_branches, sample_outcomes, thermal_signals};
use super::{check_thermal_shape, ModelKind, SignalReport};
use crate::error::{Error, Result};
use crate::oracle::TruthTable;
use crate::qcore::{
    expectation_site, expectation_zq_power, index_to_digits, Circuit, PureState, ThermalSpec,
};

/// Inputs shared by every execution model.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunContext<'a> {
    /// Required by the thermal model; ignored by the pure ones.
    pub thermal: Option<&'a ThermalSpec>,
    /// Required by the sampling model.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledOutcome {
    pub model: ModelKind,
    pub local_dim: usize,
    pub sites: usize,
    /// Measured digits, site 0 first.
    pub outcome: Vec<usize>,
    pub index: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelOutput {
    Sampled(SampledOutcome),
    Signals(SignalReport),
}

impl ModelOutput {
    pub fn signals(&self) -> Option<&SignalReport> {
        match self {
            ModelOutput::Signals(r) => Some(r),
            ModelOutput::Sampled(_) => None,
        }
    }

    pub fn sampled(&self) -> Option<&SampledOutcome> {
        match self {
            ModelOutput::Sampled(s) => Some(s),
            ModelOutput::Signals(_) => None,
        }
    }
}

/// One way of preparing the register and reading out the Fourier-sandwich
/// pipeline for an oracle table.
pub trait ExecutionModel: Send + Sync {
    fn kind(&self) -> ModelKind;

    fn name(&self) -> &'static str {
        self.kind().name()
    }

    fn describe(&self) -> &'static str;

    fn run(&self, table: &TruthTable, ctx: &RunContext<'_>) -> Result<ModelOutput>;
}

/// Single projective shot on the pure-input output state.
pub struct StandardSampling;

/// Ensemble average with every computer starting in `|0...0>`.
pub struct PureEnsemble;

/// Ensemble average over the thermal product input, enumerated branch by branch.
pub struct ThermalEnsemble;

fn pure_output(table: &TruthTable) -> Result<PureState> {
    let input = PureState::ground(table.local_dim(), table.arity())?;
    Circuit::fourier_sandwich(table)?.apply(&input)
}

fn phase_moments_of(state: &PureState) -> Result<Vec<Vec<Complex64>>> {
    let q = state.local_dim();
    (0..state.sites())
        .map(|site| {
            (1..q)
                .map(|m| expectation_zq_power(state, site, m))
                .collect()
        })
        .collect()
}

impl ExecutionModel for StandardSampling {
    fn kind(&self) -> ModelKind {
        ModelKind::Sqc
    }

    fn describe(&self) -> &'static str {
        "pure input, one projective measurement of every site"
    }

    fn run(&self, table: &TruthTable, ctx: &RunContext<'_>) -> Result<ModelOutput> {
        let seed = ctx
            .seed
            .ok_or_else(|| Error::Domain("the sampling model needs a seed".into()))?;
        let state = pure_output(table)?;
        let index = sample_outcomes(&state, seed, 1)[0];
        Ok(ModelOutput::Sampled(SampledOutcome {
            model: ModelKind::Sqc,
            local_dim: state.local_dim(),
            sites: state.sites(),
            outcome: index_to_digits(index, state.local_dim(), state.sites()),
            index,
            seed,
        }))
    }
}

impl ExecutionModel for PureEnsemble {
    fn kind(&self) -> ModelKind {
        ModelKind::BqcP
    }

    fn describe(&self) -> &'static str {
        "pure |0...0> input, ensemble-averaged site signals"
    }

    fn run(&self, table: &TruthTable, _ctx: &RunContext<'_>) -> Result<ModelOutput> {
        let state = pure_output(table)?;
        let mut report = if state.local_dim() == 2 {
            let signals = (0..state.sites())
                .map(|i| expectation_site(&state, i))
                .collect::<Result<Vec<_>>>()?;
            SignalReport::qubit(ModelKind::BqcP, signals, None)
        } else {
            SignalReport {
                model: ModelKind::BqcP,
                local_dim: state.local_dim(),
                sites: state.sites(),
                signals: Vec::new(),
                phase_moments: phase_moments_of(&state)?,
                thermal: None,
                ancilla_p1: None,
                seed: None,
                noise: None,
            }
        };
        report.thermal = Some(ThermalSpec::pure(table.local_dim(), table.arity())?);
        Ok(ModelOutput::Signals(report))
    }
}

impl ExecutionModel for ThermalEnsemble {
    fn kind(&self) -> ModelKind {
        ModelKind::Bqc
    }

    fn describe(&self) -> &'static str {
        "thermal product input, ensemble average by direct branch enumeration"
    }

    fn run(&self, table: &TruthTable, ctx: &RunContext<'_>) -> Result<ModelOutput> {
        let thermal = ctx
            .thermal
            .ok_or_else(|| Error::Domain("the thermal model needs a thermal spec".into()))?;
        let q = table.local_dim();
        let n = table.arity();
        check_thermal_shape(thermal, q, n)?;
        let report = if q == 2 {
            let signals = thermal_signals(table, thermal)?;
            SignalReport::qubit(ModelKind::Bqc, signals, Some(thermal.clone()))
        } else {
            let zero = Complex64::new(0.0, 0.0);
            let moments = fold_final_branches(
                table,
                thermal,
                vec![vec![zero; q - 1]; n],
                |mut acc, w, state| {
                    for (site, row) in acc.iter_mut().enumerate() {
                        for (mi, slot) in row.iter_mut().enumerate() {
                            *slot += expectation_zq_power(state, site, mi + 1)? * w;
                        }
                    }
                    Ok(acc)
                },
            )?;
            SignalReport {
                model: ModelKind::Bqc,
                local_dim: q,
                sites: n,
                signals: Vec::new(),
                phase_moments: moments,
                thermal: Some(thermal.clone()),
                ancilla_p1: None,
                seed: None,
                noise: None,
            }
        };
        Ok(ModelOutput::Signals(report))
    }
}

/// Execution models keyed by name.
pub struct ModelRegistry {
    models: BTreeMap<&'static str, Box<dyn ExecutionModel>>,
}

impl Default for ModelRegistry {
    /// `sqc`, `bqcp`, `bqc`.
    fn default() -> Self {
        let mut r = Self {
            models: BTreeMap::new(),
        };
        r.register(Box::new(StandardSampling));
        r.register(Box::new(PureEnsemble));
        r.register(Box::new(ThermalEnsemble));
        r
    }
}

impl ModelRegistry {
    pub fn register(&mut self, model: Box<dyn ExecutionModel>) {
        self.models.insert(model.name(), model);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.models.keys().copied()
    }

    pub fn get(&self, name: &str) -> Result<&dyn ExecutionModel> {
        self.models
            .get(name.to_ascii_lowercase().as_str())
            .map(|b| b.as_ref())
            .ok_or_else(|| {
                Error::Domain(format!(
                    "unknown model '{name}' (known: {})",
                    self.names().collect::<Vec<_>>().join(", ")
                ))
            })
    }

    pub fn by_kind(&self, kind: ModelKind) -> Result<&dyn ExecutionModel> {
        self.get(kind.name())
    }
}
