use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gates::{dft_matrix, shifted_index};
use super::{check_digits, dense_guard, digit_at, guarded_dim, root_of_unity, PureState};
use crate::error::{Error, Result};
use crate::oracle::TruthTable;

/// Dense `q^n x q^n` matrix acting on an `n`-site register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Operator {
    local_dim: usize,
    sites: usize,
    matrix: Array2<Complex64>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

impl Operator {
    pub fn new(local_dim: usize, sites: usize, matrix: Array2<Complex64>) -> Result<Self> {
        let dim = Self::dim_for(local_dim, sites)?;
        if matrix.dim() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self {
            local_dim,
            sites,
            matrix,
        })
    }

    fn dim_for(local_dim: usize, sites: usize) -> Result<usize> {
        if sites == 0 {
            return Err(Error::Domain("a register needs at least one site".into()));
        }
        guarded_dim(local_dim, sites, dense_guard(), "dense operator")
    }

    fn from_fn<F>(local_dim: usize, sites: usize, f: F) -> Result<Self>
    where
        F: FnMut((usize, usize)) -> Complex64,
    {
        let dim = Self::dim_for(local_dim, sites)?;
        Ok(Self {
            local_dim,
            sites,
            matrix: Array2::from_shape_fn((dim, dim), f),
        })
    }

    pub fn identity(local_dim: usize, sites: usize) -> Result<Self> {
        Self::from_fn(local_dim, sites, |(r, c)| if r == c { one() } else { zero() })
    }

    pub fn zeros(local_dim: usize, sites: usize) -> Result<Self> {
        Self::from_fn(local_dim, sites, |_| zero())
    }

    /// Embeds a `q x q` matrix on `site`, identity elsewhere.
    pub fn single_site(
        local_dim: usize,
        sites: usize,
        site: usize,
        gate: &Array2<Complex64>,
    ) -> Result<Self> {
        if site >= sites {
            return Err(Error::SiteOutOfRange { site, sites });
        }
        if gate.dim() != (local_dim, local_dim) {
            return Err(Error::DimensionMismatch {
                expected: local_dim,
                actual: gate.nrows(),
            });
        }
        let q = local_dim;
        let n = sites;
        let stride = q.pow((n - 1 - site) as u32);
        Self::from_fn(q, n, |(r, c)| {
            // Off-site digits must agree.
            let (dr, dc) = (digit_at(r, site, q, n), digit_at(c, site, q, n));
            if r - dr * stride == c - dc * stride {
                gate[(dr, dc)]
            } else {
                zero()
            }
        })
    }

    /// `sigma_z` on `site` with eigenvalue -1 on `|0>` and +1 on `|1>`.
    pub fn site_sigma_z(sites: usize, site: usize) -> Result<Self> {
        if site >= sites {
            return Err(Error::SiteOutOfRange { site, sites });
        }
        Self::from_fn(2, sites, |(r, c)| {
            if r != c {
                zero()
            } else if digit_at(r, site, 2, sites) == 1 {
                one()
            } else {
                -one()
            }
        })
    }

    /// `Z_q^m` on `site`, `Z_q |j> = w^j |j>`.
    pub fn zq_power(local_dim: usize, sites: usize, site: usize, m: usize) -> Result<Self> {
        if site >= sites {
            return Err(Error::SiteOutOfRange { site, sites });
        }
        Self::from_fn(local_dim, sites, |(r, c)| {
            if r == c {
                root_of_unity(local_dim, m * digit_at(r, site, local_dim, sites))
            } else {
                zero()
            }
        })
    }

    /// `X^{k_1} (x) ... (x) X^{k_n}`.
    pub fn shift_mask(local_dim: usize, k: &[usize]) -> Result<Self> {
        let n = k.len();
        check_digits(k, local_dim, n)?;
        Self::from_fn(local_dim, n, |(r, c)| {
            if shifted_index(c, k, local_dim, n) == r {
                one()
            } else {
                zero()
            }
        })
    }

    /// DFT (or inverse) on every site.
    pub fn dft_all(local_dim: usize, sites: usize, inverse: bool) -> Result<Self> {
        let m = dft_matrix(local_dim, inverse);
        Self::from_fn(local_dim, sites, |(r, c)| {
            (0..sites).fold(one(), |acc, s| {
                acc * m[(
                    digit_at(r, s, local_dim, sites),
                    digit_at(c, s, local_dim, sites),
                )]
            })
        })
    }

    /// Diagonal phase oracle `|x> -> w^{f(x)} |x>`.
    pub fn diagonal_phase(table: &TruthTable) -> Result<Self> {
        let q = table.local_dim();
        let values = table.values();
        Self::from_fn(q, table.arity(), |(r, c)| {
            if r == c {
                root_of_unity(q, values[r])
            } else {
                zero()
            }
        })
    }

    /// `|psi><psi|`.
    pub fn density(state: &PureState) -> Result<Self> {
        let a = state.amplitudes();
        Self::from_fn(state.local_dim(), state.sites(), |(r, c)| a[r] * a[c].conj())
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.matrix
    }

    pub(crate) fn with_matrix(&self, matrix: Array2<Complex64>) -> Self {
        Self {
            local_dim: self.local_dim,
            sites: self.sites,
            matrix,
        }
    }

    pub fn check_same_shape(&self, other: &Operator) -> Result<()> {
        if self.local_dim != other.local_dim || self.sites != other.sites {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        self.with_matrix(self.matrix.t().mapv(|z| z.conj()))
    }

    /// `self * other`.
    pub fn mul(&self, other: &Operator) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.with_matrix(self.matrix.dot(&other.matrix)))
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.with_matrix(&self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.with_matrix(&self.matrix - &other.matrix))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.with_matrix(self.matrix.mapv(|z| z * s))
    }

    /// `[self, other] = self other - other self`.
    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.diag().iter().sum()
    }

    /// `tr(self^dagger other)`, the Hilbert-Schmidt inner product.
    pub fn hs_inner(&self, other: &Operator) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Operator) -> Result<Complex64> {
        self.check_same_shape(other)?;
        let d = self.dim();
        let mut acc = zero();
        for r in 0..d {
            for c in 0..d {
                acc += self.matrix[(r, c)] * other.matrix[(c, r)];
            }
        }
        Ok(acc)
    }

    /// `|| U^dagger U - I ||_F`.
    pub fn unitarity_residual(&self) -> f64 {
        let prod = self.matrix.t().mapv(|z| z.conj()).dot(&self.matrix);
        prod.indexed_iter()
            .map(|((r, c), z)| {
                let target = if r == c { one() } else { zero() };
                (z - target).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Fails with the residual when `U^dagger U` is farther than `tol` from identity.
    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        let residual = self.unitarity_residual();
        if residual > tol {
            return Err(Error::NotUnitary { residual });
        }
        Ok(())
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.sub(&self.adjoint())
            .map(|d| d.frobenius_norm())
            .unwrap_or(f64::INFINITY)
    }

    /// Hermitian, unit trace, and positive semidefinite within `tol`.
    pub fn check_density(&self, tol: f64) -> Result<()> {
        let h = self.hermiticity_residual();
        if h > tol {
            return Err(Error::NotDensity(format!("not Hermitian (residual {h:e})")));
        }
        let t = self.trace();
        if (t - one()).norm() > tol {
            return Err(Error::NotDensity(format!("trace {t} != 1")));
        }
        let min = min_hermitian_eigenvalue(&self.matrix);
        if min < -tol {
            return Err(Error::NotDensity(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    /// Matrix-vector product on a state of the same shape.
    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        if state.local_dim() != self.local_dim || state.sites() != self.sites {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: state.dim(),
            });
        }
        let v = ndarray::Array1::from(state.amplitudes().to_vec());
        let out = self.matrix.dot(&v).to_vec();
        let norm: f64 = out.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > super::NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(PureState::from_raw(self.local_dim, self.sites, out))
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// Smallest eigenvalue of a Hermitian matrix. The matrix is embedded as the
/// real symmetric `[[Re, -Im], [Im, Re]]` (same spectrum, doubled) and
/// diagonalized with cyclic Jacobi rotations.
fn min_hermitian_eigenvalue(m: &Array2<Complex64>) -> f64 {
    let n = m.nrows();
    let size = 2 * n;
    let mut a = Array2::<f64>::zeros((size, size));
    for ((r, c), z) in m.indexed_iter() {
        a[(r, c)] = z.re;
        a[(r + n, c + n)] = z.re;
        a[(r, c + n)] = -z.im;
        a[(r + n, c)] = z.im;
    }
    for _ in 0..100 {
        let off: f64 = a
            .indexed_iter()
            .filter(|((r, c), _)| r != c)
            .map(|(_, v)| v * v)
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..size {
            for q in (p + 1)..size {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (2.0 * apq).atan2(a[(q, q)] - a[(p, p)]);
                let (s, c) = theta.sin_cos();
                for k in 0..size {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..size {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..size).map(|i| a[(i, i)]).fold(f64::INFINITY, f64::min)
}
