use std::path::Path;

use bulkq_core::acceptance::{run_suite, SuiteOptions};
use bulkq_core::analysis::{epsilon_exact, epsilon_sampled, EpsilonMode};
use bulkq_core::hqa::{
    bitflip_channel, certify, certify_pointwise, conjugated_channel, default_observables,
    dj_circuit, generalized_channel, random_circuit, spanning_states, UNITARY_TOL,
};
use bulkq_core::models::{
    decide_dj, estimate_repetitions, run_dj, run_dj_thermal_ancilla, run_parity,
    run_qudit_parity, simulate_readout_trial, z_from_confidence, Decision, ModelKind, ModelOutput,
    NoiseConfig, SignalReport, Verdict,
};
use bulkq_core::oracle::{classify, OracleRegistry, PromiseClass};
use bulkq_core::qcore::{
    circuit_matrix, format_digits, parse_digits, Circuit, KrausChannel, ThermalSpec,
};
use bulkq_core::{Error, Result};

use crate::args::{
    CertifyArgs, CertifyModeArg, Command, DjArgs, EpsilonArgs, NoiseArgs, ParityArgs,
    RegisterArgs, SelftestArgs,
};
use crate::report::{
    CertifyResult, CommandResult, DjResult, EpsilonResult, NoiseSummary, ParityPayload,
    ParityResult,
};

fn flag_error(flag: &str, column: usize, message: impl std::fmt::Display) -> Error {
    Error::Parse {
        line: 1,
        column,
        message: format!("--{flag}: {message}"),
    }
}

fn parse_numbers(flag: &str, text: &str, offset: usize) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut column = offset + 1;
    for part in text.split(',') {
        let v: f64 = part
            .trim()
            .parse()
            .map_err(|_| flag_error(flag, column, format!("'{part}' is not a number")))?;
        out.push(v);
        column += part.len() + 1;
    }
    Ok(out)
}

/// `--q`: scalar or comma list for qubits; for `q > 2`, one distribution
/// (broadcast) or one per site separated by `;`.
pub fn parse_thermal(text: &str, local_dim: usize, sites: usize) -> Result<ThermalSpec> {
    if local_dim == 2 {
        let ground = parse_numbers("q", text, 0)?;
        return match ground.len() {
            1 => ThermalSpec::uniform_qubits(ground[0], sites),
            len if len == sites => ThermalSpec::qubits(&ground),
            len => Err(Error::DimensionMismatch {
                expected: sites,
                actual: len,
            }),
        };
    }
    let mut dists = Vec::new();
    let mut offset = 0;
    for part in text.split(';') {
        dists.push(parse_numbers("q", part, offset)?);
        offset += part.len() + 1;
    }
    match dists.len() {
        1 => ThermalSpec::broadcast(local_dim, &dists[0], sites),
        len if len == sites => ThermalSpec::new(local_dim, dists),
        len => Err(Error::DimensionMismatch {
            expected: sites,
            actual: len,
        }),
    }
}

fn thermal_arg(register: &RegisterArgs) -> Result<Option<ThermalSpec>> {
    register
        .q
        .as_deref()
        .map(|t| parse_thermal(t, register.local_dim, register.n))
        .transpose()
}

fn model_arg(name: &str) -> Result<ModelKind> {
    name.parse()
        .map_err(|_| flag_error("model", 1, format!("unknown model '{name}' (expected sqc, bqcp, bqc)")))
}

/// Thermal specs only describe `bqc` inputs; the other models start pure.
fn check_model_thermal(model: ModelKind, thermal: Option<&ThermalSpec>) -> Result<()> {
    match (model, thermal) {
        (ModelKind::Bqc, None) => Err(Error::Domain("model bqc needs --q".into())),
        (ModelKind::Sqc | ModelKind::BqcP, Some(_)) => Err(Error::Domain(format!(
            "--q describes thermal inputs; model {model} starts from |0...0> (use bqc)"
        ))),
        _ => Ok(()),
    }
}

struct NoisePlan {
    config: NoiseConfig,
    z: f64,
    estimated: bool,
}

fn noise_plan(noise: &NoiseArgs, sites: usize, q_min: f64, seed: u64) -> Result<Option<NoisePlan>> {
    let Some(sigma) = noise.sigma else {
        return Ok(None);
    };
    if noise.trials == 0 {
        return Err(Error::Domain("--trials must be at least 1".into()));
    }
    let z = z_from_confidence(noise.confidence)?;
    let (reps, estimated) = match noise.reps {
        Some(m) => (m, false),
        None => (estimate_repetitions(sites, q_min, sigma, z)?, true),
    };
    Ok(Some(NoisePlan {
        config: NoiseConfig::new(sigma, reps, seed)?,
        z,
        estimated,
    }))
}

pub fn run(command: &Command, timing: bool) -> Result<CommandResult> {
    match command {
        Command::Dj(a) => cmd_dj(a).map(CommandResult::Dj),
        Command::Parity(a) => cmd_parity(a).map(CommandResult::Parity),
        Command::Epsilon(a) => cmd_epsilon(a).map(CommandResult::Epsilon),
        Command::Certify(a) => cmd_certify(a).map(CommandResult::Certify),
        Command::Selftest(a) => Ok(CommandResult::Selftest(cmd_selftest(a, timing))),
    }
}

fn cmd_dj(a: &DjArgs) -> Result<DjResult> {
    let reg = &a.register;
    if reg.local_dim != 2 {
        return Err(Error::QubitOnly(reg.local_dim));
    }
    let model = model_arg(&a.model)?;
    let thermal = thermal_arg(reg)?;
    check_model_thermal(model, thermal.as_ref())?;
    let table = OracleRegistry::default().resolve(&a.oracle, 2, reg.n, None)?;
    let promise = classify(&table)?;

    let output = match a.ancilla_p1 {
        Some(p1) => {
            let spec = match (model, &thermal) {
                (ModelKind::Bqc, Some(spec)) => spec,
                _ => return Err(Error::Domain("--ancilla-p1 applies to model bqc only".into())),
            };
            ModelOutput::Signals(run_dj_thermal_ancilla(&table, spec, p1)?)
        }
        None => {
            let seed = (model == ModelKind::Sqc).then_some(reg.seed);
            run_dj(model, &table, thermal.as_ref(), seed)?
        }
    };

    let decision_spec = match &thermal {
        Some(spec) => spec.clone(),
        None => ThermalSpec::pure(2, reg.n)?,
    };
    let (verdict, decision) = match &output {
        ModelOutput::Sampled(s) => {
            let verdict = if s.outcome.iter().all(|&d| d == 0) {
                Verdict::Constant
            } else {
                Verdict::Balanced
            };
            (verdict, None)
        }
        ModelOutput::Signals(r) => {
            let d = decide_dj(r, &decision_spec)?;
            (d.verdict, Some(d))
        }
    };

    let noise = match noise_plan(&a.noise, reg.n, decision_spec.min_ground(), reg.seed)? {
        None => None,
        Some(plan) => {
            let report = output.signals().ok_or_else(|| {
                Error::Domain("readout noise applies to ensemble models only".into())
            })?;
            let expected = match promise {
                PromiseClass::Constant => Some(Verdict::Constant),
                PromiseClass::Balanced => Some(Verdict::Balanced),
                PromiseClass::Neither => None,
            };
            Some(dj_noise(report, &decision_spec, expected, &plan, a.noise.trials)?)
        }
    };

    Ok(DjResult {
        table: table.to_text(),
        promise,
        verdict,
        output,
        decision,
        noise,
    })
}

fn dj_noise(
    report: &SignalReport,
    spec: &ThermalSpec,
    expected: Option<Verdict>,
    plan: &NoisePlan,
    trials: u64,
) -> Result<NoiseSummary> {
    let mut ok = 0u64;
    let mut first: Option<(SignalReport, Decision)> = None;
    for t in 0..trials {
        let noisy = simulate_readout_trial(report, &plan.config, t)?;
        let d = decide_dj(&noisy, spec)?;
        ok += u64::from(Some(d.verdict) == expected);
        if first.is_none() {
            first = Some((noisy, d));
        }
    }
    let (noisy, decision) = first.expect("at least one trial");
    Ok(NoiseSummary {
        config: plan.config,
        z: plan.z,
        estimated: plan.estimated,
        trials,
        success_rate: expected.map(|_| ok as f64 / trials as f64),
        noisy,
        noisy_decision: Some(decision),
        noisy_recovered: None,
    })
}

fn recovered_digits(signals: &[f64]) -> Vec<usize> {
    signals.iter().map(|&e| usize::from(e > 0.0)).collect()
}

fn cmd_parity(a: &ParityArgs) -> Result<ParityResult> {
    let reg = &a.register;
    let y = parse_digits(&a.y, reg.local_dim).map_err(|e| match e {
        Error::Parse { column, message, .. } => flag_error("y", column, message),
        other => other,
    })?;
    if y.len() != reg.n {
        return Err(Error::DimensionMismatch {
            expected: reg.n,
            actual: y.len(),
        });
    }
    let thermal = thermal_arg(reg)?;

    if reg.local_dim > 2 {
        if a.noise.sigma.is_some() {
            return Err(Error::Domain("readout noise is simulated for qubits only".into()));
        }
        let out = run_qudit_parity(&y, reg.local_dim, thermal.as_ref())?;
        return Ok(ParityResult {
            y: format_digits(&y),
            recovered: format_digits(&out.recovered),
            correct: out.recovered == y,
            queries: 1,
            outcome: ParityPayload::Qudit(out),
            noise: None,
        });
    }

    let model = model_arg(&a.model)?;
    check_model_thermal(model, thermal.as_ref())?;
    let seed = (model == ModelKind::Sqc).then_some(reg.seed);
    let out = run_parity(model, &y, thermal.as_ref(), seed, a.allow_degenerate)?;
    let min_margin = out.margins.iter().copied().fold(f64::INFINITY, f64::min);

    let noise = match noise_plan(&a.noise, reg.n, (1.0 + min_margin) / 2.0, reg.seed)? {
        None => None,
        Some(plan) => {
            let report = out.output.signals().ok_or_else(|| {
                Error::Domain("readout noise applies to ensemble models only".into())
            })?;
            let mut ok = 0u64;
            let mut first = None;
            for t in 0..a.noise.trials {
                let noisy = simulate_readout_trial(report, &plan.config, t)?;
                ok += u64::from(recovered_digits(&noisy.signals) == y);
                first.get_or_insert(noisy);
            }
            let noisy = first.expect("at least one trial");
            Some(NoiseSummary {
                config: plan.config,
                z: plan.z,
                estimated: plan.estimated,
                trials: a.noise.trials,
                success_rate: Some(ok as f64 / a.noise.trials as f64),
                noisy_recovered: Some(format_digits(&recovered_digits(&noisy.signals))),
                noisy,
                noisy_decision: None,
            })
        }
    };

    Ok(ParityResult {
        y: format_digits(&y),
        recovered: format_digits(&out.recovered),
        correct: out.recovered == y,
        queries: 1,
        outcome: ParityPayload::Qubit(out),
        noise,
    })
}

fn cmd_epsilon(a: &EpsilonArgs) -> Result<EpsilonResult> {
    let report = match (a.exhaustive, a.samples) {
        (_, Some(samples)) => epsilon_sampled(a.n, samples, a.seed)?,
        (true, None) => epsilon_exact(a.n)?,
        (false, None) => {
            return Err(Error::Domain("choose --exhaustive or --samples <count>".into()))
        }
    };
    Ok(EpsilonResult {
        argmin: report.argmin_table.to_text(),
        upper_bound_only: matches!(report.mode, EpsilonMode::Sampled { .. }),
        report,
    })
}

fn load_circuit(reference: &str, local_dim: usize, sites: usize) -> Result<Circuit> {
    if let Some(seed) = reference.strip_prefix("random:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| flag_error("u-circuit", 8, format!("invalid seed '{seed}'")))?;
        return random_circuit(local_dim, sites, seed);
    }
    let registry = OracleRegistry::default();
    if let Some(oracle) = reference.strip_prefix("dj:") {
        return dj_circuit(&registry.resolve_reference(oracle, local_dim, sites, None)?);
    }
    let path = Path::new(reference);
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("cannot read circuit {reference}: {e}")))?;
    Circuit::parse(&text, local_dim, sites, &registry, path.parent())
}

fn cmd_certify(a: &CertifyArgs) -> Result<CertifyResult> {
    let reg = &a.register;
    let thermal = match thermal_arg(reg)? {
        Some(t) => t,
        None => ThermalSpec::pure(reg.local_dim, reg.n)?,
    };
    let u = circuit_matrix(&load_circuit(&a.u_circuit, reg.local_dim, reg.n)?)?;
    let e = bitflip_channel(&thermal)?;
    let (form, channel) = match &a.v_circuit {
        Some(v) => {
            let v = circuit_matrix(&load_circuit(v, reg.local_dim, reg.n)?)?;
            let v = KrausChannel::unitary(&v, UNITARY_TOL)?;
            ("generalized", generalized_channel(&v, &e, &u)?)
        }
        None => ("conjugated", conjugated_channel(&u, &e)?),
    };
    let observables = default_observables(reg.local_dim, reg.n)?;
    let report = match a.mode {
        CertifyModeArg::Adjoint => certify(&channel, &observables, a.tolerance)?,
        CertifyModeArg::Pointwise => certify_pointwise(
            &channel,
            &observables,
            &spanning_states(reg.local_dim, reg.n)?,
            a.tolerance,
        )?,
    };
    Ok(CertifyResult {
        form: form.to_string(),
        thermal,
        report,
    })
}

fn cmd_selftest(a: &SelftestArgs, timing: bool) -> bulkq_core::acceptance::SuiteReport {
    run_suite(&SuiteOptions {
        inject_sign_flip: a.inject_sign_flip,
        timing,
    })
}
