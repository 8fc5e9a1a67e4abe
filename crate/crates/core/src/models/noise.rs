use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};

use super::dj::{decide_dj, Verdict};
use super::parity::parity_signs_recover;
use super::SignalReport;
use crate::error::{Error, Result};
use crate::qcore::ThermalSpec;

/// Relative slack before rounding up, so that exact products such as
/// `(2 * 10)^2 = 400` are not pushed to 401 by rounding error.
const CEIL_SLACK: f64 = 1e-12;

/// Additive Gaussian readout noise on each ensemble-averaged signal,
/// averaged over `repetitions` independent runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub sigma_read: f64,
    pub repetitions: u64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn new(sigma_read: f64, repetitions: u64, seed: u64) -> Result<Self> {
        if !(sigma_read >= 0.0 && sigma_read.is_finite()) {
            return Err(Error::Domain(format!(
                "readout noise must be finite and non-negative, got {sigma_read}"
            )));
        }
        if repetitions == 0 {
            return Err(Error::Domain("repetitions must be at least 1".into()));
        }
        Ok(Self {
            sigma_read,
            repetitions,
            seed,
        })
    }

    /// Standard deviation left after averaging, `sigma_read / sqrt(m)`.
    pub fn effective_sigma(&self) -> f64 {
        self.sigma_read / (self.repetitions as f64).sqrt()
    }
}

/// Trial 0 of [`simulate_readout_trial`].
pub fn simulate_readout(report: &SignalReport, noise: &NoiseConfig) -> Result<SignalReport> {
    simulate_readout_trial(report, noise, 0)
}

/// Adds `N(0, sigma_read / sqrt(m))` to every signal, drawing from ChaCha
/// stream `trial` under the configured seed. Complex moments get independent
/// draws on each component. Results are not clamped to `[-1, 1]`.
pub fn simulate_readout_trial(
    report: &SignalReport,
    noise: &NoiseConfig,
    trial: u64,
) -> Result<SignalReport> {
    let noise = NoiseConfig::new(noise.sigma_read, noise.repetitions, noise.seed)?;
    let mut out = report.clone();
    out.noise = Some(noise);
    let sd = noise.effective_sigma();
    if sd == 0.0 {
        return Ok(out);
    }
    let normal = Normal::new(0.0, sd).map_err(|e| Error::Internal(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    rng.set_stream(trial);
    for e in &mut out.signals {
        *e += normal.sample(&mut rng);
    }
    for z in out.phase_moments.iter_mut().flatten() {
        *z += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
    }
    Ok(out)
}

/// `(z sigma n / (2 q_min - 1))^2`: the repetitions that shrink the per-site
/// noise to `gap / (2 z)`, where `gap = (2 q_min - 1) 2 / n`.
pub fn repetitions_unrounded(sites: usize, q_min: f64, sigma_read: f64, z: f64) -> Result<f64> {
    if sites == 0 {
        return Err(Error::Domain("need at least one site".into()));
    }
    if !(q_min > 0.5 && q_min <= 1.0) {
        return Err(Error::Domain(format!(
            "min ground probability {q_min} must lie in (1/2, 1] for a finite repetition count"
        )));
    }
    if !(sigma_read >= 0.0 && sigma_read.is_finite()) || !(z > 0.0 && z.is_finite()) {
        return Err(Error::Domain(format!(
            "need sigma >= 0 and z > 0, got sigma {sigma_read}, z {z}"
        )));
    }
    let gap = (2.0 * q_min - 1.0) * 2.0 / sites as f64;
    Ok((2.0 * z * sigma_read / gap).powi(2))
}

/// [`repetitions_unrounded`] rounded up, at least 1.
pub fn estimate_repetitions(sites: usize, q_min: f64, sigma_read: f64, z: f64) -> Result<u64> {
    let m = repetitions_unrounded(sites, q_min, sigma_read, z)?;
    if m > u64::MAX as f64 / 2.0 {
        return Err(Error::Domain(format!("repetition count {m:e} is not representable")));
    }
    Ok(((m * (1.0 - CEIL_SLACK)).ceil() as u64).max(1))
}

/// One-sided standard normal quantile: `confidence = Phi(z)`.
pub fn z_from_confidence(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidProbability {
            value: confidence,
            context: "confidence must lie strictly between 0 and 1".into(),
        });
    }
    let n = StdNormal::new(0.0, 1.0).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(n.inverse_cdf(confidence))
}

/// Fraction of noisy trials whose sign readout recovers all of `y`.
pub fn parity_trial_success_rate(
    report: &SignalReport,
    y: &[usize],
    noise: &NoiseConfig,
    trials: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let mut ok = 0u64;
    for t in 0..trials {
        let noisy = simulate_readout_trial(report, noise, t)?;
        ok += u64::from(parity_signs_recover(&noisy.signals, y));
    }
    Ok(ok as f64 / trials as f64)
}

/// Fraction of noisy trials where [`decide_dj`] returns `expected`.
pub fn dj_trial_success_rate(
    report: &SignalReport,
    thermal: &ThermalSpec,
    expected: Verdict,
    noise: &NoiseConfig,
    trials: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let mut ok = 0u64;
    for t in 0..trials {
        let noisy = simulate_readout_trial(report, noise, t)?;
        ok += u64::from(decide_dj(&noisy, thermal)?.verdict == expected);
    }
    Ok(ok as f64 / trials as f64)
}
