//! Dense small-register arithmetic over sites of local dimension `q >= 2`.
//!
//! Basis indices are base-`q` numbers with site 0 as the most significant
//! digit: `x = sum_i x_i q^(n-1-i)`. Sites are 0-based in the library; the
//! command-line reports number them from 1.
//!
//! Site signals for qubits use the convention `sigma_z |x> = (2x - 1) |x>`,
//! i.e. eigenvalue -1 on `|0>`. This is the negation of the usual `diag(1, -1)`.

mod channel;
mod circuit;
mod gates;
mod mixture;
mod operator;
mod state;
mod thermal;

pub use channel::KrausChannel;
pub use circuit::{circuit_matrix, Circuit, Gate, GATE_UNITARITY_TOL};
pub use gates::{
    apply_dft_all, apply_diagonal_phase, apply_shift_mask, apply_single_site, dft_matrix,
    expectation_site,
    expectation_zq_power,
};
pub use mixture::{mixture_expectation, mixture_expectation_site, MixtureState};
pub use operator::Operator;
pub use state::PureState;
pub use thermal::{thermal_mixture, ThermalSpec};
pub(crate) use gates::walsh_hadamard_in_place;

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default bound on `q^n` for dense operators and channels.
pub const DEFAULT_DENSE_GUARD: usize = 256;
/// Bound on `q^n` for state-vector pipelines and mixture enumeration.
pub const STATE_GUARD: usize = 4096;
/// Environment variable that overrides [`DEFAULT_DENSE_GUARD`].
pub const DENSE_GUARD_ENV: &str = "BULKQ_DENSE_GUARD";
/// Mixture branches with weight below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-15;
/// Normalization tolerance for validated pure states.
pub const NORM_TOL: f64 = 1e-10;

static DENSE_GUARD: OnceLock<(usize, bool)> = OnceLock::new();

fn dense_guard_setting() -> (usize, bool) {
    *DENSE_GUARD.get_or_init(|| {
        match std::env::var(DENSE_GUARD_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            Some(v) if v > 0 => (v, true),
            _ => (DEFAULT_DENSE_GUARD, false),
        }
    })
}

/// Effective dense-matrix guard, read once from the environment.
pub fn dense_guard() -> usize {
    dense_guard_setting().0
}

/// Whether the dense guard was overridden through [`DENSE_GUARD_ENV`].
pub fn dense_guard_overridden() -> bool {
    dense_guard_setting().1
}

pub(crate) fn check_local_dim(q: usize) -> Result<()> {
    if q < 2 {
        return Err(Error::InvalidLocalDim(q));
    }
    Ok(())
}

/// `q^n`, or `None` on overflow.
pub fn register_dim(q: usize, n: usize) -> Option<usize> {
    q.checked_pow(u32::try_from(n).ok()?)
}

pub(crate) fn guarded_dim(q: usize, n: usize, guard: usize, what: &'static str) -> Result<usize> {
    check_local_dim(q)?;
    match register_dim(q, n) {
        Some(d) if d <= guard => Ok(d),
        Some(d) => Err(Error::GuardExceeded { what, dim: d, guard }),
        None => Err(Error::GuardExceeded {
            what,
            dim: usize::MAX,
            guard,
        }),
    }
}

/// Digits of a basis index, site 0 first.
pub fn index_to_digits(mut index: usize, q: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for slot in digits.iter_mut().rev() {
        *slot = index % q;
        index /= q;
    }
    digits
}

/// Basis index of a digit vector, site 0 most significant.
pub fn digits_to_index(digits: &[usize], q: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * q + d)
}

/// Digit of `site` inside basis index `index`.
#[inline]
pub fn digit_at(index: usize, site: usize, q: usize, n: usize) -> usize {
    (index / q.pow((n - 1 - site) as u32)) % q
}

pub(crate) fn check_digits(digits: &[usize], q: usize, n: usize) -> Result<()> {
    if digits.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: digits.len(),
        });
    }
    if let Some(&d) = digits.iter().find(|&&d| d >= q) {
        return Err(Error::DigitOutOfRange {
            digit: d,
            local_dim: q,
        });
    }
    Ok(())
}

/// `exp(2 pi i j / q)`, exact at multiples of a quarter turn.
pub fn root_of_unity(q: usize, j: usize) -> Complex64 {
    let j = j % q;
    if (4 * j).is_multiple_of(q) {
        return match 4 * j / q {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / q as f64)
}

pub fn is_prime(q: usize) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

/// Parse a digit string such as `"1011"` (site 0 first) over `{0..q-1}`.
pub fn parse_digits(text: &str, q: usize) -> Result<Vec<usize>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::parse(1, 1, "empty digit string"));
    }
    text.chars()
        .enumerate()
        .map(|(col, ch)| match ch.to_digit(36) {
            Some(d) if (d as usize) < q => Ok(d as usize),
            _ => Err(Error::parse(
                1,
                col + 1,
                format!("invalid digit '{ch}' for local dimension {q}"),
            )),
        })
        .collect()
}

/// Inverse of [`parse_digits`].
pub fn format_digits(digits: &[usize]) -> String {
    digits
        .iter()
        .map(|&d| std::char::from_digit(d as u32, 36).unwrap_or('?'))
        .collect()
}
