//! Brute-force checks of the worst-case gap bound, the attenuation law, the
//! commutation lemma and the spectral sum rule.
//!
//! Scans run as parallel maps over tables whose results are reduced in
//! enumeration order, so reports do not depend on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{dj_spectrum, run_dj_state, signals_from_spectrum, thermal_signals_with};
use crate::oracle::{
    classify, enumerate_balanced, sample_balanced_with, PromiseClass, TruthTable,
};
use crate::qcore::{circuit_matrix, expectation_site, Circuit, Operator, ThermalSpec};

/// Tolerance for algebraic identities on small registers.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Tolerance for normalization and vanishing spectral weight.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Largest arity accepted by [`epsilon_sampled`].
pub const SAMPLED_MAX_SITES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsilonMode {
    Exhaustive,
    /// The reported epsilon is an upper bound on the true minimum.
    Sampled { count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonReport {
    pub n: usize,
    pub epsilon: f64,
    pub argmin_table: TruthTable,
    /// Position of the minimizer in the scan order.
    pub argmin_index: usize,
    pub tables_scanned: usize,
    pub mode: EpsilonMode,
    pub bound_2_over_n: f64,
}

/// How [`epsilon_exact_with`] evaluates each table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EpsilonOptions {
    /// Simulate the output state and read each site, instead of using the
    /// integer spectrum.
    pub state_route: bool,
    /// Recompute the constant-oracle signal instead of using -1.
    pub recompute_constant: bool,
}

fn signals(table: &TruthTable, state_route: bool) -> Result<Vec<f64>> {
    if state_route {
        let s = run_dj_state(table)?;
        (0..table.arity()).map(|i| expectation_site(&s, i)).collect()
    } else {
        Ok(signals_from_spectrum(&dj_spectrum(table)?, table.arity()))
    }
}

fn best_site_gap(table: &TruthTable, constant: &[f64], state_route: bool) -> Result<f64> {
    Ok(signals(table, state_route)?
        .iter()
        .zip(constant)
        .map(|(e, c)| e - c)
        .fold(f64::NEG_INFINITY, f64::max))
}

fn scan(
    n: usize,
    tables: Vec<TruthTable>,
    mode: EpsilonMode,
    options: EpsilonOptions,
) -> Result<EpsilonReport> {
    let constant = if options.recompute_constant {
        signals(&TruthTable::constant(2, n, 0)?, options.state_route)?
    } else {
        vec![-1.0; n]
    };
    let gaps = tables
        .par_iter()
        .map(|t| best_site_gap(t, &constant, options.state_route))
        .collect::<Result<Vec<f64>>>()?;
    let (argmin_index, epsilon) = gaps
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) });
    let bound = 2.0 / n as f64;
    if epsilon < bound - IDENTITY_TOL {
        return Err(Error::Internal(format!(
            "worst-case gap {epsilon} at n = {n} is below the proven bound {bound}"
        )));
    }
    Ok(EpsilonReport {
        n,
        epsilon,
        argmin_table: tables[argmin_index].clone(),
        argmin_index,
        tables_scanned: tables.len(),
        mode,
        bound_2_over_n: bound,
    })
}

/// Exact worst-case gap `min_f max_i (E_i + 1)` over every balanced table,
/// `n <= 4`. The first minimizer in lexicographic order is reported.
pub fn epsilon_exact(n: usize) -> Result<EpsilonReport> {
    epsilon_exact_with(n, EpsilonOptions::default())
}

pub fn epsilon_exact_with(n: usize, options: EpsilonOptions) -> Result<EpsilonReport> {
    let tables: Vec<TruthTable> = enumerate_balanced(n)?.collect();
    scan(n, tables, EpsilonMode::Exhaustive, options)
}

/// Minimum over `samples` seeded uniform balanced tables; an upper bound on
/// the true worst case.
pub fn epsilon_sampled(n: usize, samples: usize, seed: u64) -> Result<EpsilonReport> {
    if n == 0 || n > SAMPLED_MAX_SITES {
        return Err(Error::GuardExceeded {
            what: "sampled gap scan sites",
            dim: n,
            guard: SAMPLED_MAX_SITES,
        });
    }
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tables = (0..samples)
        .map(|_| sample_balanced_with(n, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    scan(
        n,
        tables,
        EpsilonMode::Sampled {
            count: samples,
            seed,
        },
        EpsilonOptions::default(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fact1Check {
    /// `max_i (E_i + 1)`.
    pub best_gap: f64,
    /// `(1/n) sum_i (E_i + 1)`.
    pub mean_gap: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Checks `max_i (E_i + 1) >= mean_i (E_i + 1) >= 2/n` for one balanced table.
pub fn verify_fact1(table: &TruthTable) -> Result<Fact1Check> {
    if classify(table)? != PromiseClass::Balanced {
        return Err(Error::NotBalanced);
    }
    let n = table.arity();
    let gaps: Vec<f64> = signals(table, false)?.iter().map(|e| e + 1.0).collect();
    let best_gap = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean_gap = gaps.iter().sum::<f64>() / n as f64;
    let bound = 2.0 / n as f64;
    Ok(Fact1Check {
        best_gap,
        mean_gap,
        bound,
        holds: best_gap >= mean_gap - IDENTITY_TOL && mean_gap >= bound - IDENTITY_TOL,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fact2Check {
    /// Thermal signals by branch enumeration.
    pub direct: Vec<f64>,
    /// `(2 q_i - 1)` times the pure-input signals.
    pub predicted: Vec<f64>,
    pub residual: f64,
    pub holds: bool,
}

/// Compares the thermal ensemble, simulated branch by branch, with the
/// attenuated pure-input signals from the spectrum.
pub fn verify_fact2(table: &TruthTable, thermal: &ThermalSpec) -> Result<Fact2Check> {
    verify_fact2_with(table, thermal, false)
}

/// [`verify_fact2`] with the direct route's readout sign flipped when
/// `flip_readout` is set (self-test mutation hook).
pub fn verify_fact2_with(
    table: &TruthTable,
    thermal: &ThermalSpec,
    flip_readout: bool,
) -> Result<Fact2Check> {
    let direct = thermal_signals_with(table, thermal, flip_readout)?;
    let pure = signals(table, false)?;
    let predicted: Vec<f64> = thermal
        .attenuations()?
        .iter()
        .zip(&pure)
        .map(|(a, e)| a * e)
        .collect();
    let residual = direct
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Fact2Check {
        direct,
        predicted,
        residual,
        holds: residual <= IDENTITY_TOL,
    })
}

/// `|| [X^k, H U_f H] ||_F` for the Deutsch-Jozsa circuit of `table`.
pub fn commutation_residual(table: &TruthTable, k: &[usize]) -> Result<f64> {
    if table.local_dim() != 2 {
        return Err(Error::QubitOnly(table.local_dim()));
    }
    let u = circuit_matrix(&Circuit::fourier_sandwich(table)?)?;
    commutation_residual_with(&u, k)
}

/// `|| [X^k, U] ||_F` for an arbitrary operator.
pub fn commutation_residual_with(u: &Operator, k: &[usize]) -> Result<f64> {
    let x = Operator::shift_mask(u.local_dim(), k)?;
    Ok(x.commutator(u)?.frobenius_norm())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumRuleRecord {
    /// `sum_i E_i` from the simulated output state.
    pub signal_sum: f64,
    /// `2 sum_{y != 0} |g(y)|^2 |y| - n` from the spectrum.
    pub spectral_sum: f64,
    pub equality_residual: f64,
    /// `|g(0)|^2`.
    pub zero_weight: f64,
    /// `sum_y |g(y)|^2`.
    pub spectrum_total: f64,
    /// `(1/n) sum_i E_i`.
    pub average: f64,
    /// `2/n - 1`.
    pub average_bound: f64,
    pub holds: bool,
}

/// Evaluates both sides of the sum rule for a balanced table and the
/// average-signal bound it implies.
pub fn sum_rule_check(table: &TruthTable) -> Result<SumRuleRecord> {
    if classify(table)? != PromiseClass::Balanced {
        return Err(Error::NotBalanced);
    }
    let n = table.arity();
    let spectrum = dj_spectrum(table)?;
    let signal_sum: f64 = signals(table, true)?.iter().sum();
    let weighted: f64 = spectrum
        .iter()
        .enumerate()
        .skip(1)
        .map(|(y, g)| g * y.count_ones() as f64)
        .sum();
    let spectral_sum = 2.0 * weighted - n as f64;
    let equality_residual = (signal_sum - spectral_sum).abs();
    let zero_weight = spectrum[0];
    let spectrum_total: f64 = spectrum.iter().sum();
    let average = signal_sum / n as f64;
    let average_bound = 2.0 / n as f64 - 1.0;
    Ok(SumRuleRecord {
        signal_sum,
        spectral_sum,
        equality_residual,
        zero_weight,
        spectrum_total,
        average,
        average_bound,
        holds: equality_residual <= IDENTITY_TOL
            && zero_weight <= NORMALIZATION_TOL
            && (spectrum_total - 1.0).abs() <= NORMALIZATION_TOL
            && average >= average_bound - IDENTITY_TOL,
    })
}
