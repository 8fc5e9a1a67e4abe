use ndarray::Array2;
use num_complex::Complex64;

use super::{check_digits, digit_at, root_of_unity, PureState};
use crate::error::{Error, Result};
use crate::oracle::TruthTable;

/// `q x q` single-site DFT: `|x> -> q^(-1/2) sum_y w^(xy) |y>`, or its inverse.
pub fn dft_matrix(q: usize, inverse: bool) -> Array2<Complex64> {
    let scale = 1.0 / (q as f64).sqrt();
    Array2::from_shape_fn((q, q), |(y, x)| {
        let e = (x * y) % q;
        let e = if inverse { (q - e) % q } else { e };
        root_of_unity(q, e) * scale
    })
}

/// Applies a `q x q` matrix to one site (0-based).
pub fn apply_single_site(
    state: &PureState,
    site: usize,
    matrix: &Array2<Complex64>,
) -> Result<PureState> {
    state.check_site(site)?;
    let q = state.local_dim();
    if matrix.dim() != (q, q) {
        return Err(Error::DimensionMismatch {
            expected: q,
            actual: matrix.nrows(),
        });
    }
    let n = state.sites();
    let stride = q.pow((n - 1 - site) as u32);
    let old = state.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); old.len()];
    let block = stride * q;
    for base in (0..old.len()).step_by(block) {
        for offset in 0..stride {
            let start = base + offset;
            for y in 0..q {
                let mut acc = Complex64::new(0.0, 0.0);
                for x in 0..q {
                    acc += matrix[(y, x)] * old[start + x * stride];
                }
                out[start + y * stride] = acc;
            }
        }
    }
    Ok(PureState::from_raw(q, n, out))
}

/// Applies the single-site DFT (or its inverse) to every site.
/// For qubits this is `H^{(x) n}` and the inverse flag has no effect.
pub fn apply_dft_all(state: &PureState, inverse: bool) -> PureState {
    let q = state.local_dim();
    let n = state.sites();
    if q == 2 {
        let mut amps = state.amplitudes().to_vec();
        walsh_hadamard_in_place(&mut amps);
        let scale = (amps.len() as f64).sqrt().recip();
        amps.iter_mut().for_each(|a| *a *= scale);
        return PureState::from_raw(q, n, amps);
    }
    let m = dft_matrix(q, inverse);
    (0..n).fold(state.clone(), |s, site| {
        apply_single_site(&s, site, &m).expect("site within range")
    })
}

/// Unnormalized in-place Walsh-Hadamard butterflies.
pub(crate) fn walsh_hadamard_in_place<T>(v: &mut [T])
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    let len = v.len();
    let mut h = 1;
    while h < len {
        for i in (0..len).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Shifts every site `i` by `k[i]` modulo `q`; a pure permutation of amplitudes.
pub fn apply_shift_mask(state: &PureState, k: &[usize]) -> Result<PureState> {
    let q = state.local_dim();
    let n = state.sites();
    check_digits(k, q, n)?;
    let old = state.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); old.len()];
    for (x, &a) in old.iter().enumerate() {
        out[shifted_index(x, k, q, n)] = a;
    }
    Ok(PureState::from_raw(q, n, out))
}

pub(crate) fn shifted_index(x: usize, k: &[usize], q: usize, n: usize) -> usize {
    (0..n).fold(0, |acc, site| {
        acc * q + (digit_at(x, site, q, n) + k[site]) % q
    })
}

/// Multiplies the amplitude at `x` by `w^{f(x)}`, `w = exp(2 pi i / q)`.
pub fn apply_diagonal_phase(state: &PureState, table: &TruthTable) -> Result<PureState> {
    table.check_register(state.local_dim(), state.sites())?;
    let q = state.local_dim();
    let phases: Vec<Complex64> = (0..q).map(|j| root_of_unity(q, j)).collect();
    let amps = state
        .amplitudes()
        .iter()
        .zip(table.values())
        .map(|(&a, &v)| a * phases[v])
        .collect();
    Ok(PureState::from_raw(q, state.sites(), amps))
}

/// `<sigma_z>` on one qubit site, with `sigma_z |x> = (2x - 1)|x>`.
pub fn expectation_site(state: &PureState, site: usize) -> Result<f64> {
    if state.local_dim() != 2 {
        return Err(Error::QubitOnly(state.local_dim()));
    }
    state.check_site(site)?;
    let n = state.sites();
    let shift = n - 1 - site;
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(x, a)| {
            let sign = if (x >> shift) & 1 == 1 { 1.0 } else { -1.0 };
            sign * a.norm_sqr()
        })
        .sum())
}

/// `<Z_q^m>` on one site, `Z_q |j> = w^j |j>`.
pub fn expectation_zq_power(state: &PureState, site: usize, m: usize) -> Result<Complex64> {
    let q = state.local_dim();
    if m == 0 || m >= q {
        return Err(Error::PowerOutOfRange { m, local_dim: q });
    }
    state.check_site(site)?;
    let n = state.sites();
    let phases: Vec<Complex64> = (0..q).map(|j| root_of_unity(q, m * j)).collect();
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(x, a)| phases[digit_at(x, site, q, n)] * a.norm_sqr())
        .sum())
}
