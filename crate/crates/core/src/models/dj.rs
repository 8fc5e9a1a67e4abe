use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::registry::{ModelOutput, ModelRegistry, RunContext};
use super::{check_thermal_shape, require_qubits, ModelKind, SignalReport, MIXTURE_MAX_SITES};
use crate::error::{Error, Result};
use crate::oracle::{full_oracle_matrix, TruthTable};
use crate::qcore::{
    expectation_site, guarded_dim, index_to_digits, walsh_hadamard_in_place, Circuit, Operator,
    PureState, ThermalSpec, PRUNE_THRESHOLD, STATE_GUARD,
};

/// Branches summed per block in the thermal scan. Blocks are combined in
/// index order, so the result does not depend on the thread count.
const BRANCH_BLOCK: usize = 64;

/// Output state of `H U_f H` on `|0...0>`, with the pure ancilla folded into
/// the diagonal phase oracle.
pub fn run_dj_state(table: &TruthTable) -> Result<PureState> {
    require_qubits(table.local_dim())?;
    let input = PureState::ground(2, table.arity())?;
    Circuit::fourier_sandwich(table)?.apply(&input)
}

fn sign_vector(table: &TruthTable) -> Vec<i64> {
    table
        .values()
        .iter()
        .map(|&v| if v == 0 { 1 } else { -1 })
        .collect()
}

/// `|g(y)|^2` for every `y`, `g(y) = 2^-n sum_x (-1)^(f(x) + x.y)`.
///
/// The transform runs in exact integer arithmetic.
pub fn dj_spectrum(table: &TruthTable) -> Result<Vec<f64>> {
    require_qubits(table.local_dim())?;
    let dim = guarded_dim(2, table.arity(), STATE_GUARD, "spectrum")?;
    let mut w = sign_vector(table);
    walsh_hadamard_in_place(&mut w);
    let scale = (dim as f64).powi(2);
    Ok(w.iter().map(|&c| (c * c) as f64 / scale).collect())
}

/// `E_i = sum_y |g(y)|^2 (2 y_i - 1)` for each site.
pub fn signals_from_spectrum(spectrum: &[f64], sites: usize) -> Vec<f64> {
    (0..sites)
        .map(|i| {
            let shift = sites - 1 - i;
            spectrum
                .iter()
                .enumerate()
                .map(|(y, &p)| if (y >> shift) & 1 == 1 { p } else { -p })
                .sum()
        })
        .collect()
}

fn check_branch_guard(thermal: &ThermalSpec) -> Result<usize> {
    let q = thermal.local_dim();
    let n = thermal.sites();
    if q == 2 && n > MIXTURE_MAX_SITES {
        return Err(Error::GuardExceeded {
            what: "thermal branch enumeration sites",
            dim: n,
            guard: MIXTURE_MAX_SITES,
        });
    }
    guarded_dim(q, n, STATE_GUARD, "thermal branch enumeration")
}

/// Streams every thermal branch `(p_k, H U_f H |k>)` through `step`, in
/// basis-index order of `k`. Branches below the pruning threshold are skipped.
pub fn fold_final_branches<A, F>(
    table: &TruthTable,
    thermal: &ThermalSpec,
    init: A,
    mut step: F,
) -> Result<A>
where
    F: FnMut(A, f64, &PureState) -> Result<A>,
{
    let q = table.local_dim();
    let n = table.arity();
    check_thermal_shape(thermal, q, n)?;
    let dim = check_branch_guard(thermal)?;
    let circuit = Circuit::fourier_sandwich(table)?;
    let mut acc = init;
    for index in 0..dim {
        let p = thermal.branch_weight(&index_to_digits(index, q, n));
        if p < PRUNE_THRESHOLD {
            continue;
        }
        let out = circuit.apply(&PureState::basis(q, n, index)?)?;
        acc = step(acc, p, &out)?;
    }
    Ok(acc)
}

/// Unnormalized output distribution `dim^2 |<y| H U_f H |k>|^2`, exact.
fn branch_distribution(signs: &[i64], k: usize, scratch: &mut Vec<i64>) {
    scratch.clear();
    scratch.extend(
        signs
            .iter()
            .enumerate()
            .map(|(x, &s)| if (x & k).count_ones().is_multiple_of(2) { s } else { -s }),
    );
    walsh_hadamard_in_place(scratch);
    scratch.iter_mut().for_each(|w| *w *= *w);
}

/// Ensemble `<sigma_z>` per site under the thermal input, by simulating
/// every branch `|k>` through the circuit and reading the weighted output
/// distribution. This never uses the attenuation law; the two are compared
/// in the test suite.
pub fn thermal_signals(table: &TruthTable, thermal: &ThermalSpec) -> Result<Vec<f64>> {
    thermal_signals_with(table, thermal, false)
}

/// [`thermal_signals`] with an optional sign flip of the site readout.
/// The flip exists only so the self-test can check that it catches a broken
/// readout.
pub fn thermal_signals_with(
    table: &TruthTable,
    thermal: &ThermalSpec,
    flip_readout: bool,
) -> Result<Vec<f64>> {
    require_qubits(table.local_dim())?;
    let n = table.arity();
    check_thermal_shape(thermal, 2, n)?;
    let dim = check_branch_guard(thermal)?;
    let signs = sign_vector(table);

    let blocks: Vec<Vec<f64>> = (0..dim.div_ceil(BRANCH_BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![0.0; dim];
            let mut scratch = Vec::with_capacity(dim);
            for k in b * BRANCH_BLOCK..((b + 1) * BRANCH_BLOCK).min(dim) {
                let p = thermal.branch_weight(&index_to_digits(k, 2, n));
                if p < PRUNE_THRESHOLD {
                    continue;
                }
                branch_distribution(&signs, k, &mut scratch);
                for (a, &w) in acc.iter_mut().zip(scratch.iter()) {
                    *a += p * w as f64;
                }
            }
            acc
        })
        .collect();

    let mut mixture = vec![0.0; dim];
    for block in blocks {
        for (t, v) in mixture.iter_mut().zip(block) {
            *t += v;
        }
    }
    let norm = (dim as f64).powi(2);
    mixture.iter_mut().for_each(|p| *p /= norm);
    let mut signals = signals_from_spectrum(&mixture, n);
    if flip_readout {
        signals.iter_mut().for_each(|e| *e = -*e);
    }
    Ok(signals)
}

/// Runs the Deutsch-Jozsa pipeline under one execution model.
pub fn run_dj(
    kind: ModelKind,
    table: &TruthTable,
    thermal: Option<&ThermalSpec>,
    seed: Option<u64>,
) -> Result<ModelOutput> {
    require_qubits(table.local_dim())?;
    let registry = ModelRegistry::default();
    let mut out = registry
        .by_kind(kind)?
        .run(table, &RunContext { thermal, seed })?;
    if let ModelOutput::Signals(r) = &mut out {
        r.seed = seed;
    }
    Ok(out)
}

/// Draws `shots` computational-basis outcomes. Shot `t` uses its own ChaCha
/// stream `t` under `seed`, so any subset of shots can be reproduced alone.
pub fn sample_outcomes(state: &PureState, seed: u64, shots: usize) -> Vec<usize> {
    let mut cum = Vec::with_capacity(state.dim());
    let mut total = 0.0;
    for p in state.probabilities() {
        total += p;
        cum.push(total);
    }
    let last_nonzero = state
        .probabilities()
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(0);
    (0..shots)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let u: f64 = rng.random::<f64>() * total;
            cum.iter().position(|&c| u < c).unwrap_or(last_nonzero)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Constant,
    Balanced,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    /// Site with the largest score; set only for a Balanced verdict.
    pub witness: Option<usize>,
    /// Distance of the best score from its threshold.
    pub margin: f64,
    /// Per-site threshold `-(2 q_i - 1) + (2 q' - 1) / n`.
    pub thresholds: Vec<f64>,
}

/// Balanced iff some site clears `-(2 q_i - 1) + (2 q' - 1) / n`, the middle
/// of the guaranteed gap between constant and balanced signals.
pub fn decide_dj(report: &SignalReport, thermal: &ThermalSpec) -> Result<Decision> {
    require_qubits(report.local_dim)?;
    let n = report.signals.len();
    if n == 0 || n != report.sites {
        return Err(Error::Domain("report carries no qubit signals".into()));
    }
    check_thermal_shape(thermal, 2, n)?;
    let q_min = thermal.min_ground();
    if 2.0 * q_min - 1.0 <= 0.0 {
        return Err(Error::Domain(format!(
            "min ground probability {q_min} leaves no gap between constant and balanced signals"
        )));
    }
    let offset = (2.0 * q_min - 1.0) / n as f64;
    let thresholds: Vec<f64> = thermal
        .attenuations()?
        .iter()
        .map(|a| -a + offset)
        .collect();
    let (best, score) = report
        .signals
        .iter()
        .zip(&thresholds)
        .map(|(e, t)| e - t)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bs), (i, s)| {
            if s > bs {
                (i, s)
            } else {
                (bi, bs)
            }
        });
    let balanced = score >= 0.0;
    Ok(Decision {
        verdict: if balanced {
            Verdict::Balanced
        } else {
            Verdict::Constant
        },
        witness: balanced.then_some(best),
        margin: score.abs(),
        thresholds,
    })
}

/// Deutsch-Jozsa on the full `n + 1` qubit register with a thermal ancilla
/// that starts in `|1>` with probability `ancilla_p1` (and `|0>` otherwise).
pub fn run_dj_thermal_ancilla(
    table: &TruthTable,
    thermal: &ThermalSpec,
    ancilla_p1: f64,
) -> Result<SignalReport> {
    require_qubits(table.local_dim())?;
    if !(0.0..=1.0).contains(&ancilla_p1) {
        return Err(Error::InvalidProbability {
            value: ancilla_p1,
            context: "ancilla |1> probability".into(),
        });
    }
    let n = table.arity();
    check_thermal_shape(thermal, 2, n)?;
    let h = Operator::dft_all(2, n + 1, false)?;
    let u = h.mul(&full_oracle_matrix(table)?)?.mul(&h)?;

    let mut signals = vec![0.0; n];
    for k in 0..1usize << n {
        let pk = thermal.branch_weight(&index_to_digits(k, 2, n));
        for (a, pa) in [(0usize, 1.0 - ancilla_p1), (1, ancilla_p1)] {
            let w = pk * pa;
            if w < PRUNE_THRESHOLD {
                continue;
            }
            let out = u.apply(&PureState::basis(2, n + 1, (k << 1) | a)?)?;
            for (i, s) in signals.iter_mut().enumerate() {
                *s += w * expectation_site(&out, i)?;
            }
        }
    }
    let mut report = SignalReport::qubit(ModelKind::Bqc, signals, Some(thermal.clone()));
    report.ancilla_p1 = Some(ancilla_p1);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enumerate_balanced, inner_product_table, sample_balanced};

    fn basis_distance(s: &PureState, index: usize) -> f64 {
        1.0 - s.amplitude(index).norm_sqr()
    }

    fn brute_spectrum(table: &TruthTable) -> Vec<f64> {
        let n = table.arity();
        let dim = 1usize << n;
        (0..dim)
            .map(|y| {
                let g: f64 = (0..dim)
                    .map(|x| {
                        let e = table.value(x) + (x & y).count_ones() as usize;
                        if e.is_multiple_of(2) { 1.0 } else { -1.0 }
                    })
                    .sum::<f64>()
                    / dim as f64;
                g * g
            })
            .collect()
    }

    #[test]
    fn constant_and_parity_states() {
        let c = run_dj_state(&TruthTable::constant(2, 3, 1).unwrap()).unwrap();
        assert!(basis_distance(&c, 0) < 1e-12);
        let p = run_dj_state(&inner_product_table(&[1, 1], 2, 2).unwrap()).unwrap();
        assert!(basis_distance(&p, 3) < 1e-12);
        let y = run_dj_state(&inner_product_table(&[1, 0, 1], 2, 3).unwrap()).unwrap();
        assert!(basis_distance(&y, 5) < 1e-12);
    }

    #[test]
    fn spectrum_matches_direct_sum() {
        for n in 1..=3 {
            for t in enumerate_balanced(n).unwrap() {
                let s = dj_spectrum(&t).unwrap();
                assert_eq!(s, brute_spectrum(&t));
                assert_eq!(s[0], 0.0);
                assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        let x1 = TruthTable::new(2, 2, vec![0, 0, 1, 1]).unwrap();
        assert_eq!(dj_spectrum(&x1).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn signals_agree_between_routes() {
        for seed in 0..10 {
            let t = sample_balanced(4, seed).unwrap();
            let state = run_dj_state(&t).unwrap();
            let a = signals_from_spectrum(&dj_spectrum(&t).unwrap(), 4);
            for (i, e) in a.iter().enumerate() {
                assert!((e - expectation_site(&state, i).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn thermal_constant_is_attenuated() {
        let t = TruthTable::constant(2, 3, 0).unwrap();
        let spec = ThermalSpec::uniform_qubits(0.75, 3).unwrap();
        for e in thermal_signals(&t, &spec).unwrap() {
            assert!((e + 0.5).abs() < 1e-12);
        }
        let flipped = thermal_signals_with(&t, &spec, true).unwrap();
        assert!(flipped.iter().all(|e| (e - 0.5).abs() < 1e-12));
    }

    #[test]
    fn thermal_matches_generic_branch_fold() {
        let t = sample_balanced(3, 4).unwrap();
        let spec = ThermalSpec::qubits(&[0.9, 0.7, 0.55]).unwrap();
        let fast = thermal_signals(&t, &spec).unwrap();
        let slow = fold_final_branches(&t, &spec, vec![0.0; 3], |mut acc, w, s| {
            for (i, a) in acc.iter_mut().enumerate() {
                *a += w * expectation_site(s, i)?;
            }
            Ok(acc)
        })
        .unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_respects_point_masses() {
        let c = run_dj_state(&TruthTable::constant(2, 3, 0).unwrap()).unwrap();
        assert!(sample_outcomes(&c, 1, 2000).iter().all(|&y| y == 0));
        let b = run_dj_state(&sample_balanced(3, 2).unwrap()).unwrap();
        let shots = sample_outcomes(&b, 1, 2000);
        assert!(shots.iter().all(|&y| y != 0));
        assert_eq!(shots, sample_outcomes(&b, 1, 2000));
        assert_eq!(shots[17..20], sample_outcomes(&b, 1, 20)[17..20]);
    }

    #[test]
    fn decision_rule() {
        let spec = ThermalSpec::pure(2, 2).unwrap();
        let report = SignalReport::qubit(ModelKind::BqcP, vec![1.0, -1.0], None);
        let d = decide_dj(&report, &spec).unwrap();
        assert_eq!(d.verdict, Verdict::Balanced);
        assert_eq!(d.witness, Some(0));
        let constant = SignalReport::qubit(ModelKind::BqcP, vec![-1.0, -1.0], None);
        let d = decide_dj(&constant, &spec).unwrap();
        assert_eq!(d.verdict, Verdict::Constant);
        assert_eq!(d.witness, None);
        assert!((d.margin - 0.5).abs() < 1e-15);
        let tie = SignalReport::qubit(ModelKind::BqcP, vec![0.0, 0.0], None);
        assert_eq!(decide_dj(&tie, &spec).unwrap().witness, Some(0));
        let flat = ThermalSpec::uniform_qubits(0.5, 2).unwrap();
        assert!(decide_dj(&constant, &flat).is_err());
    }

    #[test]
    fn thermal_ancilla_limits() {
        let spec = ThermalSpec::qubits(&[0.8, 0.65]).unwrap();
        for t in enumerate_balanced(2).unwrap() {
            let full = run_dj_thermal_ancilla(&t, &spec, 1.0).unwrap();
            let direct = thermal_signals(&t, &spec).unwrap();
            for (a, b) in full.signals.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-12);
            }
            let none = run_dj_thermal_ancilla(&t, &spec, 0.0).unwrap();
            assert!((none.signals[0] + 0.6).abs() < 1e-12);
            assert!((none.signals[1] + 0.3).abs() < 1e-12);
        }
        assert!(run_dj_thermal_ancilla(&TruthTable::constant(2, 2, 0).unwrap(), &spec, 1.5).is_err());
    }

    #[test]
    fn guards() {
        let t = TruthTable::constant(3, 2, 0).unwrap();
        assert!(matches!(dj_spectrum(&t), Err(Error::QubitOnly(3))));
        assert!(matches!(run_dj_state(&t), Err(Error::QubitOnly(3))));
    }
}
