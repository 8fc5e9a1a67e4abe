//! Channel-proportionality certifier.
//!
//! A circuit `U` run on a register that first suffered the shift channel
//! `E(rho) = sum_k p_k X^k rho X^-k` behaves like `F(U rho U^dagger)` with
//! `F = U E U^dagger`. The algorithm tolerates hot inputs when every readout
//! observable `O` is an eigen-operator of the adjoint channel,
//! `F^dagger(O) = c O`, so that ensemble signals are only rescaled.

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::TruthTable;
use crate::qcore::{
    dense_guard, guarded_dim, index_to_digits, Circuit, Gate, KrausChannel, Operator, ThermalSpec,
};

/// Default certification tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Unitarity required of `U` before a channel is conjugated by it.
pub const UNITARY_TOL: f64 = 1e-10;
/// Density-operator validity tolerance for pointwise states.
pub const DENSITY_TOL: f64 = 1e-9;
/// `sum |tr(rho O)|^2` below this makes a pointwise fit degenerate.
const DEGENERATE_FIT: f64 = 1e-20;

/// Shift channel `{sqrt(p_k) X^k}` over every `k` with `p_k > 0`.
pub fn bitflip_channel(spec: &ThermalSpec) -> Result<KrausChannel> {
    let q = spec.local_dim();
    let n = spec.sites();
    let dim = guarded_dim(q, n, dense_guard(), "shift channel")?;
    let mut ops = Vec::new();
    for index in 0..dim {
        let k = index_to_digits(index, q, n);
        let p = spec.branch_weight(&k);
        if p > 0.0 {
            ops.push(Operator::shift_mask(q, &k)?.scale(Complex64::new(p.sqrt(), 0.0)));
        }
    }
    KrausChannel::new(ops)
}

fn check_pair(u: &Operator, channel: &KrausChannel) -> Result<()> {
    if u.local_dim() != channel.local_dim() || u.sites() != channel.sites() {
        return Err(Error::DimensionMismatch {
            expected: channel.operators()[0].dim(),
            actual: u.dim(),
        });
    }
    u.check_unitary(UNITARY_TOL)
}

/// `F = U E U^dagger`: Kraus operators `U A_k U^dagger`.
pub fn conjugated_channel(u: &Operator, channel: &KrausChannel) -> Result<KrausChannel> {
    check_pair(u, channel)?;
    let ud = u.adjoint();
    let ops = channel
        .operators()
        .iter()
        .map(|a| u.mul(a)?.mul(&ud))
        .collect::<Result<Vec<_>>>()?;
    KrausChannel::new(ops)
}

/// `F = V E U^-1`, the channel solving `V . E = F . U`: Kraus operators
/// `V_j A_k U^dagger`.
pub fn generalized_channel(
    v: &KrausChannel,
    channel: &KrausChannel,
    u: &Operator,
) -> Result<KrausChannel> {
    check_pair(u, channel)?;
    let ud = u.adjoint();
    let mut ops = Vec::with_capacity(v.len() * channel.len());
    for vj in v.operators() {
        channel.check_shape(vj)?;
        for a in channel.operators() {
            ops.push(vj.mul(a)?.mul(&ud)?);
        }
    }
    KrausChannel::new(ops)
}

/// Heisenberg action `sum_k B_k^dagger O B_k`.
pub fn adjoint_apply(channel: &KrausChannel, observable: &Operator) -> Result<Operator> {
    channel.adjoint_apply(observable)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    /// For example `sigma_z[2]` or `Z^1[1]` (sites numbered from 1).
    pub label: String,
    pub operator: Operator,
}

/// Per-site `sigma_z` for qubits, every `Z_q^m` (`m = 1..q-1`) per site otherwise.
pub fn default_observables(local_dim: usize, sites: usize) -> Result<Vec<Observable>> {
    let mut out = Vec::new();
    for site in 0..sites {
        if local_dim == 2 {
            out.push(Observable {
                label: format!("sigma_z[{}]", site + 1),
                operator: Operator::site_sigma_z(sites, site)?,
            });
        } else {
            for m in 1..local_dim {
                out.push(Observable {
                    label: format!("Z^{m}[{}]", site + 1),
                    operator: Operator::zq_power(local_dim, sites, site, m)?,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertifyMode {
    /// `F^dagger(O) = c O` as an operator identity (all input states).
    Adjoint,
    /// Least-squares `c` over a supplied list of states.
    Pointwise { states: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableResult {
    pub label: String,
    pub constant: Complex64,
    pub magnitude: f64,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProportionalityReport {
    pub mode: CertifyMode,
    pub tolerance: f64,
    pub observables: Vec<ObservableResult>,
    pub pass: bool,
}

impl ProportionalityReport {
    fn new(mode: CertifyMode, tolerance: f64, observables: Vec<ObservableResult>) -> Self {
        let pass = observables.iter().all(|o| o.pass);
        Self {
            mode,
            tolerance,
            observables,
            pass,
        }
    }

    pub fn constants(&self) -> Vec<Complex64> {
        self.observables.iter().map(|o| o.constant).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.observables
            .iter()
            .map(|o| o.residual)
            .fold(0.0, f64::max)
    }
}

/// Projects `F^dagger(O)` onto `O`, `c = tr(F^dagger(O) O^dagger) / tr(O O^dagger)`,
/// and reports `|| F^dagger(O) - c O ||_F / || O ||_F`.
pub fn certify(
    channel: &KrausChannel,
    observables: &[Observable],
    tolerance: f64,
) -> Result<ProportionalityReport> {
    let results = observables
        .iter()
        .map(|obs| {
            let o = &obs.operator;
            let norm = o.frobenius_norm();
            if norm == 0.0 {
                return Err(Error::ZeroObservable);
            }
            let image = channel.adjoint_apply(o)?;
            let c = o.hs_inner(&image)? / (norm * norm);
            let residual = image.sub(&o.scale(c))?.frobenius_norm() / norm;
            Ok(ObservableResult {
                label: obs.label.clone(),
                constant: c,
                magnitude: c.norm(),
                residual,
                pass: residual <= tolerance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProportionalityReport::new(CertifyMode::Adjoint, tolerance, results))
}

/// Fits one `c` per observable so that `tr(F(rho) O) ~ c tr(rho O)` over the
/// given states and reports the largest pointwise misfit.
pub fn certify_pointwise(
    channel: &KrausChannel,
    observables: &[Observable],
    states: &[Operator],
    tolerance: f64,
) -> Result<ProportionalityReport> {
    if states.is_empty() {
        return Err(Error::Domain("pointwise certification needs at least one state".into()));
    }
    for rho in states {
        rho.check_density(DENSITY_TOL)?;
    }
    let images = states
        .iter()
        .map(|rho| channel.apply(rho))
        .collect::<Result<Vec<_>>>()?;
    let results = observables
        .iter()
        .map(|obs| {
            let o = &obs.operator;
            if o.frobenius_norm() == 0.0 {
                return Err(Error::ZeroObservable);
            }
            let mut before = Vec::with_capacity(states.len());
            let mut after = Vec::with_capacity(states.len());
            for (rho, image) in states.iter().zip(&images) {
                before.push(rho.trace_product(o)?);
                after.push(image.trace_product(o)?);
            }
            let denom: f64 = before.iter().map(|a| a.norm_sqr()).sum();
            if denom <= DEGENERATE_FIT {
                return Err(Error::DegenerateFit(obs.label.clone()));
            }
            let c = before
                .iter()
                .zip(&after)
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
                / denom;
            let residual = before
                .iter()
                .zip(&after)
                .map(|(a, b)| (b - c * a).norm())
                .fold(0.0, f64::max);
            Ok(ObservableResult {
                label: obs.label.clone(),
                constant: c,
                magnitude: c.norm(),
                residual,
                pass: residual <= tolerance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProportionalityReport::new(
        CertifyMode::Pointwise {
            states: states.len(),
        },
        tolerance,
        results,
    ))
}

/// `H U_f H` (or `DFT^-1 U_f DFT`) for a truth table.
pub fn dj_circuit(table: &TruthTable) -> Result<Circuit> {
    Circuit::fourier_sandwich(table)
}

fn ginibre<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Array2<Complex64> {
    Array2::from_shape_simple_fn((dim, dim), || {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

/// Random `dim x dim` unitary: Gram-Schmidt on the columns of a complex
/// Gaussian matrix.
pub fn random_unitary_matrix<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Array2<Complex64> {
    let mut m = ginibre(dim, rng);
    for j in 0..dim {
        for i in 0..j {
            let proj: Complex64 = (0..dim).map(|r| m[(r, i)].conj() * m[(r, j)]).sum();
            for r in 0..dim {
                let v = m[(r, i)];
                m[(r, j)] -= proj * v;
            }
        }
        let norm = (0..dim).map(|r| m[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..dim {
            m[(r, j)] /= norm;
        }
    }
    m
}

/// Random single-site unitaries on every site, a random phase oracle, and a
/// second random layer. Generic enough that proportionality fails.
pub fn random_circuit(local_dim: usize, sites: usize, seed: u64) -> Result<Circuit> {
    let dim = guarded_dim(local_dim, sites, dense_guard(), "random circuit")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::new();
    for site in 0..sites {
        gates.push(Gate::SingleSite {
            site,
            matrix: random_unitary_matrix(local_dim, &mut rng),
        });
    }
    let values = (0..dim)
        .map(|_| rand::Rng::random_range(&mut rng, 0..local_dim))
        .collect();
    gates.push(Gate::PhaseOracle(TruthTable::new(local_dim, sites, values)?));
    for site in 0..sites {
        gates.push(Gate::SingleSite {
            site,
            matrix: random_unitary_matrix(local_dim, &mut rng),
        });
    }
    Circuit::new(local_dim, sites, gates)
}

/// Random full-rank density operator `G G^dagger / tr(G G^dagger)`.
pub fn random_density<R: rand::Rng + ?Sized>(
    local_dim: usize,
    sites: usize,
    rng: &mut R,
) -> Result<Operator> {
    let dim = guarded_dim(local_dim, sites, dense_guard(), "density operator")?;
    let g = ginibre(dim, rng);
    let rho = g.dot(&g.t().mapv(|z| z.conj()));
    let tr: Complex64 = rho.diag().iter().sum();
    Operator::new(local_dim, sites, rho.mapv(|z| z / tr))
}

/// Pure states `|i>`, `(|i> + |j>)/sqrt2`, `(|i> + i|j>)/sqrt2` whose
/// projectors span every operator on the register.
pub fn spanning_states(local_dim: usize, sites: usize) -> Result<Vec<Operator>> {
    let dim = guarded_dim(local_dim, sites, dense_guard(), "spanning states")?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(dim * dim);
    let ket = |entries: &[(usize, Complex64)]| {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        for &(i, a) in entries {
            v[i] = a;
        }
        Operator::new(
            local_dim,
            sites,
            Array2::from_shape_fn((dim, dim), |(r, c)| v[r] * v[c].conj()),
        )
    };
    for i in 0..dim {
        out.push(ket(&[(i, Complex64::new(1.0, 0.0))])?);
        for j in i + 1..dim {
            out.push(ket(&[(i, Complex64::new(h, 0.0)), (j, Complex64::new(h, 0.0))])?);
            out.push(ket(&[(i, Complex64::new(h, 0.0)), (j, Complex64::new(0.0, h))])?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::circuit_matrix;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_qubit_bitflip() {
        let ch = bitflip_channel(&ThermalSpec::qubits(&[0.75]).unwrap()).unwrap();
        assert_eq!(ch.len(), 2);
        let want0 = Operator::identity(2, 1).unwrap().scale(c(0.75f64.sqrt()));
        let want1 = Operator::shift_mask(2, &[1]).unwrap().scale(c(0.5));
        assert!(ch.operators()[0].max_abs_diff(&want0).unwrap() < 1e-15);
        assert!(ch.operators()[1].max_abs_diff(&want1).unwrap() < 1e-15);
        assert!(ch.completeness_residual() < 1e-12);
        let pure = bitflip_channel(&ThermalSpec::pure(2, 3).unwrap()).unwrap();
        assert_eq!(pure.len(), 1);
    }

    #[test]
    fn adjoint_on_sigma_z_and_zq() {
        let ch = bitflip_channel(&ThermalSpec::qubits(&[0.8]).unwrap()).unwrap();
        let z = Operator::site_sigma_z(1, 0).unwrap();
        let out = adjoint_apply(&ch, &z).unwrap();
        assert!(out.sub(&z.scale(c(0.6))).unwrap().frobenius_norm() < 1e-12);

        let spec = ThermalSpec::new(3, vec![vec![0.5, 0.3, 0.2]]).unwrap();
        let ch = bitflip_channel(&spec).unwrap();
        let z3 = Operator::zq_power(3, 1, 0, 1).unwrap();
        let out = adjoint_apply(&ch, &z3).unwrap();
        let k = spec.channel_constant(0, 1).unwrap();
        assert!(out.sub(&z3.scale(k)).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn dj_circuit_certifies_with_attenuations() {
        let t = crate::oracle::sample_balanced(2, 11).unwrap();
        let u = circuit_matrix(&dj_circuit(&t).unwrap()).unwrap();
        let spec = ThermalSpec::qubits(&[0.8, 0.6]).unwrap();
        let e = bitflip_channel(&spec).unwrap();
        let f = conjugated_channel(&u, &e).unwrap();
        assert!(f.termwise_distance(&e).unwrap() < 1e-10);
        let r = certify(&f, &default_observables(2, 2).unwrap(), DEFAULT_TOLERANCE).unwrap();
        assert!(r.pass);
        for (got, want) in r.constants().iter().zip([0.6, 0.2]) {
            assert!((got - c(want)).norm() < 1e-9);
        }
    }

    #[test]
    fn random_circuit_fails() {
        let u = circuit_matrix(&random_circuit(2, 2, 1).unwrap()).unwrap();
        let spec = ThermalSpec::qubits(&[0.8, 0.6]).unwrap();
        let f = conjugated_channel(&u, &bitflip_channel(&spec).unwrap()).unwrap();
        let r = certify(&f, &default_observables(2, 2).unwrap(), DEFAULT_TOLERANCE).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn pointwise_matches_adjoint_on_spanning_set() {
        let t = crate::oracle::sample_balanced(2, 4).unwrap();
        let u = circuit_matrix(&dj_circuit(&t).unwrap()).unwrap();
        let spec = ThermalSpec::qubits(&[0.9, 0.7]).unwrap();
        let f = conjugated_channel(&u, &bitflip_channel(&spec).unwrap()).unwrap();
        let obs = default_observables(2, 2).unwrap();
        let a = certify(&f, &obs, DEFAULT_TOLERANCE).unwrap();
        let p = certify_pointwise(&f, &obs, &spanning_states(2, 2).unwrap(), DEFAULT_TOLERANCE)
            .unwrap();
        assert_eq!(a.pass, p.pass);
        for (x, y) in a.constants().iter().zip(p.constants()) {
            assert!((x - y).norm() < 1e-9);
        }
        let mixed = Operator::identity(2, 2).unwrap().scale(c(0.25));
        assert!(matches!(
            certify_pointwise(&f, &obs, &[mixed], DEFAULT_TOLERANCE),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn generalized_reduces_to_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = Operator::new(2, 2, random_unitary_matrix(4, &mut rng)).unwrap();
        let e = bitflip_channel(&ThermalSpec::qubits(&[0.7, 0.9]).unwrap()).unwrap();
        let v = KrausChannel::unitary(&u, 1e-10).unwrap();
        let g = generalized_channel(&v, &e, &u).unwrap();
        let conj = conjugated_channel(&u, &e).unwrap();
        assert!(g.termwise_distance(&conj).unwrap() < 1e-12);
        let rho = random_density(2, 2, &mut rng).unwrap();
        rho.check_density(1e-9).unwrap();
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for dim in [2, 3, 8, 9] {
            let u = random_unitary_matrix(dim, &mut rng);
            let prod = u.t().mapv(|z| z.conj()).dot(&u);
            for ((r, col), z) in prod.indexed_iter() {
                let want = if r == col { 1.0 } else { 0.0 };
                assert!((z - c(want)).norm() < 1e-12, "dim {dim}");
            }
        }
    }

}
