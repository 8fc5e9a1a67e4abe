use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dj::{fold_final_branches, run_dj};
use super::registry::ModelOutput;
use super::ModelKind;
use crate::error::{Error, Result};
use crate::oracle::inner_product_table;
use crate::qcore::{expectation_zq_power, is_prime, ThermalSpec};

/// Below this `|2 q_i - 1|` a site carries no usable parity signal.
const DEGENERATE_ATTENUATION: f64 = 1e-12;
/// Populations closer than this count as tied.
const POPULATION_TIE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityOutcome {
    pub recovered: Vec<usize>,
    /// `2 q_i - 1` per site; 1 for pure inputs.
    pub margins: Vec<f64>,
    /// Sites whose signal vanishes or is inverted (`q_i <= 1/2`). Their
    /// recovered digit is not meaningful. Empty unless degenerate sites were
    /// explicitly allowed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate_sites: Vec<usize>,
    pub output: ModelOutput,
}

/// One query of the inner-product oracle `f(x) = x.y`; reads `y` back off the
/// register. Ensemble models recover `y_i = 1` iff `E_i > 0`.
pub fn run_parity(
    model: ModelKind,
    y: &[usize],
    thermal: Option<&ThermalSpec>,
    seed: Option<u64>,
    allow_degenerate: bool,
) -> Result<ParityOutcome> {
    let n = y.len();
    let table = inner_product_table(y, 2, n)?;
    let margins = match (model, thermal) {
        (ModelKind::Bqc, Some(spec)) => spec.attenuations()?,
        _ => vec![1.0; n],
    };
    let degenerate_sites: Vec<usize> = margins
        .iter()
        .enumerate()
        .filter(|(_, &m)| m <= DEGENERATE_ATTENUATION)
        .map(|(i, _)| i)
        .collect();
    if let (Some(&site), false) = (degenerate_sites.first(), allow_degenerate) {
        return Err(Error::DegenerateSite { site });
    }
    let output = run_dj(model, &table, thermal, seed)?;
    let recovered = match &output {
        ModelOutput::Sampled(s) => s.outcome.clone(),
        ModelOutput::Signals(r) => r.signals.iter().map(|&e| usize::from(e > 0.0)).collect(),
    };
    Ok(ParityOutcome {
        recovered,
        margins,
        degenerate_sites,
        output,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuditParityOutcome {
    pub local_dim: usize,
    pub recovered: Vec<usize>,
    /// Basis populations `[site][digit]` of the output ensemble.
    pub populations: Vec<Vec<f64>>,
    /// `<Z_q^m>` as `[site][m - 1]`.
    pub phase_moments: Vec<Vec<Complex64>>,
}

/// Inner-product oracle over `Z_q` for prime `q`, `DFT^-1 U_f DFT` on the
/// (possibly thermal) input; `y_i` is the most populated digit of site `i`.
pub fn run_qudit_parity(
    y: &[usize],
    local_dim: usize,
    thermal: Option<&ThermalSpec>,
) -> Result<QuditParityOutcome> {
    let q = local_dim;
    if !is_prime(q) {
        return Err(Error::NonPrime(q));
    }
    let n = y.len();
    let table = inner_product_table(y, q, n)?;
    let pure;
    let spec = match thermal {
        Some(s) => s,
        None => {
            pure = ThermalSpec::pure(q, n)?;
            &pure
        }
    };
    let zero = Complex64::new(0.0, 0.0);
    let (populations, phase_moments) = fold_final_branches(
        &table,
        spec,
        (vec![vec![0.0; q]; n], vec![vec![zero; q - 1]; n]),
        |(mut pops, mut moments), w, state| {
            for (x, p) in state.probabilities().into_iter().enumerate() {
                let mut rest = x;
                for site in (0..n).rev() {
                    pops[site][rest % q] += w * p;
                    rest /= q;
                }
            }
            for (site, row) in moments.iter_mut().enumerate() {
                for (mi, slot) in row.iter_mut().enumerate() {
                    *slot += expectation_zq_power(state, site, mi + 1)? * w;
                }
            }
            Ok((pops, moments))
        },
    )?;
    let recovered = populations
        .iter()
        .enumerate()
        .map(|(site, pops)| {
            let best = (0..q)
                .reduce(|b, j| if pops[j] > pops[b] { j } else { b })
                .expect("q >= 2");
            let tied = (0..q).any(|j| j != best && (pops[j] - pops[best]).abs() <= POPULATION_TIE);
            if tied {
                Err(Error::DegenerateSite { site })
            } else {
                Ok(best)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuditParityOutcome {
        local_dim: q,
        recovered,
        populations,
        phase_moments,
    })
}

pub(crate) fn parity_signs_recover(signals: &[f64], y: &[usize]) -> bool {
    signals.len() == y.len()
        && signals
            .iter()
            .zip(y)
            .all(|(&e, &yi)| usize::from(e > 0.0) == yi)
}
