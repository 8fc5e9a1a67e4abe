//! End-to-end acceptance criteria, shared by the `acceptance` test target and
//! `bulkq selftest`.
//!
//! Every criterion is deterministic: seeds are fixed below and detail strings
//! carry no timings unless [`SuiteOptions::timing`] is set.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    commutation_residual, commutation_residual_with, epsilon_exact, epsilon_sampled,
    sum_rule_check, verify_fact2_with,
};
use crate::error::Result;
use crate::hqa::{
    bitflip_channel, certify, conjugated_channel, default_observables, dj_circuit, random_circuit,
};
use crate::models::{
    decide_dj, dj_spectrum, estimate_repetitions, repetitions_unrounded, run_dj_state,
    run_dj_thermal_ancilla, run_parity, run_qudit_parity, sample_outcomes, simulate_readout_trial,
    thermal_signals, ModelKind, NoiseConfig, SignalReport, Verdict,
};
use crate::oracle::{
    count_affine_balanced, enumerate_balanced, inner_product_table, sample_balanced, TruthTable,
};
use crate::qcore::{
    circuit_matrix, dft_matrix, index_to_digits, root_of_unity, Operator, ThermalSpec,
};

/// Base seed; each criterion derives its own stream from it.
pub const SUITE_SEED: u64 = 20_011;

/// Per-site confidence multiplier used for the noisy Deutsch-Jozsa criterion.
/// A constant table is misread if any of the `n` sites crosses its threshold,
/// so the per-site tail must be well below `5% / n`.
pub const DJ_NOISE_Z: f64 = 3.0;
const PARITY_NOISE_Z: f64 = 2.0;
const READOUT_SIGMA: f64 = 0.3;
const NOISY_TRIALS: u64 = 1000;
const SUCCESS_FLOOR: f64 = 0.95;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SuiteOptions {
    /// Flip the sign of the thermal-branch readout (mutation check).
    pub inject_sign_flip: bool,
    /// Append wall times to detail strings.
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub criteria: Vec<CriterionResult>,
    pub pass: bool,
}

impl CriterionResult {
    /// `[PASS] 3 commutation lemma: ...`
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

type Check = fn(&SuiteOptions) -> Result<(bool, String)>;

const CRITERIA: [(u8, &str, Check); 11] = [
    (1, "worst-case gap bound", gap_bound),
    (2, "thermal attenuation law", attenuation_law),
    (3, "commutation lemma", commutation_lemma),
    (4, "certifier constants", certifier_constants),
    (5, "parity one-query recovery", parity_recovery),
    (6, "spectrum facts", spectrum_facts),
    (7, "sum-rule chain", sum_rules),
    (8, "affine balanced count", affine_count),
    (9, "thermal ancilla halving", thermal_ancilla),
    (10, "qudit generalization", qudit_generalization),
    (11, "repetition scaling", repetition_scaling),
];

pub fn criterion_ids() -> impl Iterator<Item = u8> {
    CRITERIA.iter().map(|c| c.0)
}

/// Runs one criterion; errors count as failures with the message as detail.
pub fn run_criterion(id: u8, options: &SuiteOptions) -> Option<CriterionResult> {
    let &(id, name, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (pass, mut detail) = match check(options) {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    if options.timing {
        detail.push_str(&format!("; {:.3} s", start.elapsed().as_secs_f64()));
    }
    Some(CriterionResult {
        id,
        name: name.to_string(),
        pass,
        detail,
    })
}

pub fn run_suite(options: &SuiteOptions) -> SuiteReport {
    let criteria: Vec<CriterionResult> = criterion_ids()
        .filter_map(|id| run_criterion(id, options))
        .collect();
    let pass = criteria.iter().all(|c| c.pass);
    SuiteReport { criteria, pass }
}

fn rng_for(criterion: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    rng.set_stream(criterion);
    rng
}

fn fmt_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
    format!("[{}]", parts.join(", "))
}

fn within_budget(start: Instant, budget: Duration) -> (bool, String) {
    let elapsed = start.elapsed();
    if elapsed <= budget {
        (true, String::new())
    } else {
        (
            false,
            format!("; over the {} s budget", budget.as_secs()),
        )
    }
}

fn gap_bound(_: &SuiteOptions) -> Result<(bool, String)> {
    let start = Instant::now();
    let mut eps = Vec::new();
    let mut scanned = Vec::new();
    let mut pass = true;
    for n in 1..=4 {
        let r = epsilon_exact(n)?;
        pass &= r.epsilon >= 2.0 / n as f64 - 1e-10;
        eps.push(r.epsilon);
        scanned.push(r.tables_scanned.to_string());
    }
    pass &= eps[1] == 2.0;
    pass &= scanned == ["2", "6", "70", "12870"];
    let (in_time, note) = within_budget(start, Duration::from_secs(10));
    Ok((
        pass && in_time,
        format!(
            "epsilon(1..4) = {}, tables {}{note}",
            fmt_list(&eps),
            scanned.join("/")
        ),
    ))
}

fn random_ground_probabilities(rng: &mut ChaCha8Rng, n: usize) -> Result<ThermalSpec> {
    let q: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    ThermalSpec::qubits(&q)
}

fn attenuation_law(options: &SuiteOptions) -> Result<(bool, String)> {
    let start = Instant::now();
    let mut rng = rng_for(2);
    let mut worst = 0.0f64;
    for n in 1..=6 {
        for _ in 0..100 {
            let table = sample_balanced(n, rng.random())?;
            let spec = random_ground_probabilities(&mut rng, n)?;
            let check = verify_fact2_with(&table, &spec, options.inject_sign_flip)?;
            worst = worst.max(check.residual);
        }
    }
    let (in_time, note) = within_budget(start, Duration::from_secs(30));
    Ok((
        worst <= 1e-10 && in_time,
        format!("600 pairs, max residual {worst:.3e} (tol 1e-10){note}"),
    ))
}

fn commutation_lemma(_: &SuiteOptions) -> Result<(bool, String)> {
    let mut rng = rng_for(3);
    let mut worst = 0.0f64;
    for n in 1..=3 {
        for _ in 0..20 {
            let table = TruthTable::from_fn(2, n, |_| rng.random_range(0..2))?;
            for k in 0..1usize << n {
                worst = worst.max(commutation_residual(&table, &index_to_digits(k, 2, n))?);
            }
        }
    }
    let h = Operator::single_site(2, 2, 0, &dft_matrix(2, false))?;
    let control = (0..4)
        .map(|k| commutation_residual_with(&h, &index_to_digits(k, 2, 2)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok((
        worst <= 1e-10 && control > 0.1,
        format!("max residual {worst:.3e} (tol 1e-10), non-diagonal control {control:.3}"),
    ))
}

fn certifier_constants(_: &SuiteOptions) -> Result<(bool, String)> {
    let mut rng = rng_for(4);
    let mut worst_c = 0.0f64;
    let mut all_pass = true;
    let mut tables_checked = 0;
    for spec in [vec![0.8, 0.6], vec![0.8, 0.6, 0.7]] {
        let n = spec.len();
        let thermal = ThermalSpec::qubits(&spec)?;
        let e = bitflip_channel(&thermal)?;
        let obs = default_observables(2, n)?;
        let mut tables = vec![TruthTable::constant(2, n, 0)?];
        for _ in 0..5 {
            tables.push(sample_balanced(n, rng.random())?);
        }
        for t in &tables {
            let u = circuit_matrix(&dj_circuit(t)?)?;
            let r = certify(&conjugated_channel(&u, &e)?, &obs, 1e-9)?;
            all_pass &= r.pass;
            for (c, q) in r.constants().iter().zip(&spec) {
                worst_c = worst_c.max((c - Complex64::new(2.0 * q - 1.0, 0.0)).norm());
            }
            tables_checked += 1;
        }
    }

    let flat = ThermalSpec::uniform_qubits(0.5, 3)?;
    let u = circuit_matrix(&dj_circuit(&sample_balanced(3, rng.random())?)?)?;
    let r = certify(
        &conjugated_channel(&u, &bitflip_channel(&flat)?)?,
        &default_observables(2, 3)?,
        1e-9,
    )?;
    let flat_c = r.constants().iter().map(|c| c.norm()).fold(0.0, f64::max);

    let spec = ThermalSpec::qubits(&[0.8, 0.6])?;
    let u = circuit_matrix(&random_circuit(2, 2, rng.random())?)?;
    let neg = certify(
        &conjugated_channel(&u, &bitflip_channel(&spec)?)?,
        &default_observables(2, 2)?,
        1e-9,
    )?;

    Ok((
        all_pass && worst_c <= 1e-9 && flat_c <= 1e-12 && !neg.pass,
        format!(
            "{tables_checked} circuits, max |c - (2q-1)| {worst_c:.3e}, mixed |c| {flat_c:.3e}, \
             random circuit residual {:.3e}",
            neg.max_residual()
        ),
    ))
}

fn parity_recovery(_: &SuiteOptions) -> Result<(bool, String)> {
    let mut rng = rng_for(5);
    let mut exact = true;
    let mut rates = Vec::new();
    let mut reps = Vec::new();
    for n in [4usize, 8, 12] {
        let spec = ThermalSpec::uniform_qubits(0.6, n)?;
        let mut runs: Vec<(Vec<usize>, SignalReport)> = Vec::with_capacity(50);
        for _ in 0..50 {
            let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let out = run_parity(ModelKind::Bqc, &y, Some(&spec), None, false)?;
            exact &= out.recovered == y;
            let report = out
                .output
                .signals()
                .cloned()
                .expect("ensemble model returns signals");
            runs.push((y, report));
        }
        let m = estimate_repetitions(n, 0.6, READOUT_SIGMA, PARITY_NOISE_Z)?;
        let noise = NoiseConfig::new(READOUT_SIGMA, m, rng.random())?;
        let mut ok = 0u64;
        for t in 0..NOISY_TRIALS {
            let (y, report) = &runs[t as usize % runs.len()];
            let noisy = simulate_readout_trial(report, &noise, t)?;
            ok += u64::from(
                noisy
                    .signals
                    .iter()
                    .zip(y)
                    .all(|(&e, &yi)| usize::from(e > 0.0) == yi),
            );
        }
        rates.push(ok as f64 / NOISY_TRIALS as f64);
        reps.push(m.to_string());
    }
    let noisy_ok = rates.iter().all(|&r| r >= SUCCESS_FLOOR);
    Ok((
        exact && noisy_ok,
        format!(
            "150 noise-free runs {}, noisy success {} at m = {}",
            if exact { "exact" } else { "NOT exact" },
            fmt_list(&rates),
            reps.join("/")
        ),
    ))
}

fn spectrum_facts(_: &SuiteOptions) -> Result<(bool, String)> {
    let mut rng = rng_for(6);
    let mut point_mass = true;
    for n in 1..=4 {
        for v in 0..2 {
            let s = dj_spectrum(&TruthTable::constant(2, n, v)?)?;
            point_mass &= (s[0] - 1.0).abs() <= 1e-12 && s[1..].iter().all(|p| p.abs() <= 1e-12);
        }
    }
    let mut max_g0 = 0.0f64;
    let mut count = 0;
    for n in 1..=4 {
        for t in enumerate_balanced(n)? {
            max_g0 = max_g0.max(dj_spectrum(&t)?[0]);
            count += 1;
        }
    }
    let shots = 10_000;
    let constant = run_dj_state(&TruthTable::constant(2, 4, 1)?)?;
    let const_ok = sample_outcomes(&constant, rng.random(), shots)
        .iter()
        .all(|&y| y == 0);
    let mut bal_ok = true;
    for t in [
        sample_balanced(4, rng.random())?,
        inner_product_table(&[1, 1, 1, 1], 2, 4)?,
        enumerate_balanced(4)?.next().expect("non-empty"),
    ] {
        bal_ok &= sample_outcomes(&run_dj_state(&t)?, rng.random(), shots)
            .iter()
            .all(|&y| y != 0);
    }
    Ok((
        point_mass && max_g0 <= 1e-12 && const_ok && bal_ok,
        format!(
            "constant point masses {}, max |g(0)|^2 over {count} balanced {max_g0:.3e}, \
             {shots} shots: constant always 0 {const_ok}, balanced never 0 {bal_ok}",
            if point_mass { "ok" } else { "broken" }
        ),
    ))
}

fn sum_rules(_: &SuiteOptions) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut all = true;
    let mut count = 0;
    for n in 1..=4 {
        for t in enumerate_balanced(n)? {
            let r = sum_rule_check(&t)?;
            worst = worst.max(r.equality_residual);
            all &= r.holds;
            count += 1;
        }
    }
    Ok((
        all && worst <= 1e-10,
        format!("{count} tables, max equality residual {worst:.3e}, average bound holds {all}"),
    ))
}

fn affine_count(_: &SuiteOptions) -> Result<(bool, String)> {
    let counts = (2..=4)
        .map(count_affine_balanced)
        .collect::<Result<Vec<_>>>()?;
    let affine: Vec<u128> = counts.iter().map(|c| c.affine_balanced).collect();
    let totals: Vec<u128> = counts.iter().map(|c| c.total_balanced).collect();
    Ok((
        affine == [6, 14, 30] && totals[0] == 6,
        format!("affine {affine:?} of balanced {totals:?}"),
    ))
}

fn thermal_ancilla(_: &SuiteOptions) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in [2usize, 3] {
        for spec in [
            ThermalSpec::pure(2, n)?,
            ThermalSpec::qubits(&[0.9, 0.8, 0.7][..n])?,
        ] {
            let constant = TruthTable::constant(2, n, 0)?;
            let c_half = run_dj_thermal_ancilla(&constant, &spec, 0.5)?.signals;
            let c_full = run_dj_thermal_ancilla(&constant, &spec, 1.0)?.signals;
            for t in enumerate_balanced(n)? {
                let half = run_dj_thermal_ancilla(&t, &spec, 0.5)?.signals;
                let full = run_dj_thermal_ancilla(&t, &spec, 1.0)?.signals;
                for i in 0..n {
                    let gap_half = half[i] - c_half[i];
                    let gap_full = full[i] - c_full[i];
                    worst = worst.max((gap_half - 0.5 * gap_full).abs());
                }
                count += 1;
            }
        }
    }
    Ok((
        worst <= 1e-9,
        format!("{count} runs, max |gap(1/2) - gap(1)/2| {worst:.3e} (tol 1e-9)"),
    ))
}

fn qudit_generalization(_: &SuiteOptions) -> Result<(bool, String)> {
    let q = 3;
    let hot = ThermalSpec::broadcast(q, &[0.6, 0.3, 0.1], 2)?;
    let mut recovered = 0;
    for index in 0..9 {
        let y = index_to_digits(index, q, 2);
        let pure = run_qudit_parity(&y, q, None)?;
        let thermal = run_qudit_parity(&y, q, Some(&hot))?;
        if pure.recovered == y && thermal.recovered == y {
            recovered += 1;
        }
    }

    let mut worst = 0.0f64;
    let mut all_pass = true;
    let table = inner_product_table(&[1, 2], q, 2)?;
    let u = circuit_matrix(&dj_circuit(&table)?)?;
    let obs = default_observables(q, 2)?;
    for dist in [
        vec![vec![0.5, 0.3, 0.2], vec![0.7, 0.2, 0.1]],
        vec![vec![1.0 / 3.0; 3], vec![0.6, 0.3, 0.1]],
    ] {
        let spec = ThermalSpec::new(q, dist.clone())?;
        let r = certify(&conjugated_channel(&u, &bitflip_channel(&spec)?)?, &obs, 1e-9)?;
        all_pass &= r.pass;
        // Observables are ordered site-major, then m = 1..q-1.
        for (idx, got) in r.constants().iter().enumerate() {
            let (site, m) = (idx / (q - 1), idx % (q - 1) + 1);
            let want: Complex64 = dist[site]
                .iter()
                .enumerate()
                .map(|(j, &r)| root_of_unity(q, m * j) * r)
                .sum();
            worst = worst.max((got - want).norm());
        }
    }
    Ok((
        recovered == 9 && all_pass && worst <= 1e-9,
        format!(
            "{recovered}/9 digit vectors recovered (pure and thermal), \
             max |c - sum_j r_j w^(mj)| {worst:.3e} including uniform r"
        ),
    ))
}

fn repetition_scaling(_: &SuiteOptions) -> Result<(bool, String)> {
    let mut rng = rng_for(11);
    let mut exact_ratio = true;
    for n in [2usize, 4, 8, 16] {
        let a = repetitions_unrounded(n, 0.6, READOUT_SIGMA, DJ_NOISE_Z)?;
        let b = repetitions_unrounded(2 * n, 0.6, READOUT_SIGMA, DJ_NOISE_Z)?;
        exact_ratio &= (b / a - 4.0).abs() <= 1e-12;
    }
    exact_ratio &= estimate_repetitions(10, 1.0, 1.0, 2.0)? == 400;
    exact_ratio &= estimate_repetitions(20, 1.0, 1.0, 2.0)? == 1600;

    let mut rates = Vec::new();
    let mut reps = Vec::new();
    for n in [4usize, 8] {
        let spec = ThermalSpec::uniform_qubits(0.6, n)?;
        let m = estimate_repetitions(n, spec.min_ground(), READOUT_SIGMA, DJ_NOISE_Z)?;
        let worst = if n <= 4 {
            epsilon_exact(n)?.argmin_table
        } else {
            epsilon_sampled(n, 2000, rng.random())?.argmin_table
        };
        for (table, expected) in [
            (TruthTable::constant(2, n, 0)?, Verdict::Constant),
            (worst, Verdict::Balanced),
        ] {
            let report = SignalReport {
                signals: thermal_signals(&table, &spec)?,
                ..SignalReport::qubit(ModelKind::Bqc, Vec::new(), Some(spec.clone()))
            };
            let report = SignalReport {
                sites: n,
                ..report
            };
            let noise = NoiseConfig::new(READOUT_SIGMA, m, rng.random())?;
            let mut ok = 0u64;
            for t in 0..NOISY_TRIALS {
                let noisy = simulate_readout_trial(&report, &noise, t)?;
                ok += u64::from(decide_dj(&noisy, &spec)?.verdict == expected);
            }
            rates.push(ok as f64 / NOISY_TRIALS as f64);
        }
        reps.push(m.to_string());
    }
    Ok((
        exact_ratio && rates.iter().all(|&r| r >= SUCCESS_FLOOR),
        format!(
            "doubling n quadruples m {}, noisy decisions (constant, worst balanced) {} at m = {} (z = {DJ_NOISE_Z})",
            if exact_ratio { "exactly" } else { "NOT exactly" },
            fmt_list(&rates),
            reps.join("/")
        ),
    ))
}
