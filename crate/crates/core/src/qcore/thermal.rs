use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    check_local_dim, guarded_dim, index_to_digits, root_of_unity, MixtureState, PureState,
    PRUNE_THRESHOLD, STATE_GUARD,
};
use crate::error::{Error, Result};

const DIST_TOL: f64 = 1e-12;

/// Independent per-site initial distributions. For qubits, site `i` is
/// `(q_i, 1 - q_i)` with `q_i = Pr(|0>)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalSpec {
    local_dim: usize,
    site_distributions: Vec<Vec<f64>>,
}

impl ThermalSpec {
    pub fn new(local_dim: usize, site_distributions: Vec<Vec<f64>>) -> Result<Self> {
        check_local_dim(local_dim)?;
        if site_distributions.is_empty() {
            return Err(Error::Domain("thermal spec needs at least one site".into()));
        }
        for (site, dist) in site_distributions.iter().enumerate() {
            if dist.len() != local_dim {
                return Err(Error::DimensionMismatch {
                    expected: local_dim,
                    actual: dist.len(),
                });
            }
            if let Some(&bad) = dist.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::InvalidProbability {
                    value: bad,
                    context: format!("site {} distribution entry", site + 1),
                });
            }
            let total: f64 = dist.iter().sum();
            if (total - 1.0).abs() > DIST_TOL {
                return Err(Error::InvalidProbability {
                    value: total,
                    context: format!("site {} distribution must sum to 1", site + 1),
                });
            }
        }
        Ok(Self {
            local_dim,
            site_distributions,
        })
    }

    /// Qubit spec from ground-state probabilities `q_i`.
    pub fn qubits(ground: &[f64]) -> Result<Self> {
        if let Some(&bad) = ground.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidProbability {
                value: bad,
                context: "ground-state probability".into(),
            });
        }
        Self::new(2, ground.iter().map(|&g| vec![g, 1.0 - g]).collect())
    }

    /// Every site in `|0>` with probability `ground`.
    pub fn uniform_qubits(ground: f64, sites: usize) -> Result<Self> {
        Self::qubits(&vec![ground; sites])
    }

    /// Same distribution on every site.
    pub fn broadcast(local_dim: usize, dist: &[f64], sites: usize) -> Result<Self> {
        Self::new(local_dim, vec![dist.to_vec(); sites])
    }

    /// The pure `|0...0>` limit.
    pub fn pure(local_dim: usize, sites: usize) -> Result<Self> {
        let mut d = vec![0.0; local_dim];
        d[0] = 1.0;
        Self::broadcast(local_dim, &d, sites)
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn sites(&self) -> usize {
        self.site_distributions.len()
    }

    pub fn site_distributions(&self) -> &[Vec<f64>] {
        &self.site_distributions
    }

    /// `r_{i,0}`, the ground-state probability of each site.
    pub fn ground_probabilities(&self) -> Vec<f64> {
        self.site_distributions.iter().map(|d| d[0]).collect()
    }

    /// `q' = min_i q_i`.
    pub fn min_ground(&self) -> f64 {
        self.site_distributions
            .iter()
            .map(|d| d[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Qubit signal attenuation `2 q_i - 1` for each site.
    pub fn attenuations(&self) -> Result<Vec<f64>> {
        if self.local_dim != 2 {
            return Err(Error::QubitOnly(self.local_dim));
        }
        Ok(self
            .site_distributions
            .iter()
            .map(|d| 2.0 * d[0] - 1.0)
            .collect())
    }

    /// `sum_j r_{i,j} w^{m j}`, the constant a shift channel multiplies `Z_q^m` by.
    pub fn channel_constant(&self, site: usize, m: usize) -> Result<Complex64> {
        let dist = self
            .site_distributions
            .get(site)
            .ok_or(Error::SiteOutOfRange {
                site,
                sites: self.sites(),
            })?;
        if m == 0 || m >= self.local_dim {
            return Err(Error::PowerOutOfRange {
                m,
                local_dim: self.local_dim,
            });
        }
        Ok(dist
            .iter()
            .enumerate()
            .map(|(j, &r)| root_of_unity(self.local_dim, m * j) * r)
            .sum())
    }

    /// `p_k = prod_i r_{i,k_i}`.
    pub fn branch_weight(&self, k: &[usize]) -> f64 {
        self.site_distributions
            .iter()
            .zip(k)
            .map(|(d, &ki)| d[ki])
            .product()
    }

    pub fn is_pure(&self) -> bool {
        self.site_distributions.iter().all(|d| d[0] == 1.0)
    }
}

/// Enumerates `{(p_k, X^k |0...0>)}` in basis-index order of `k`, dropping
/// branches with `p_k < 1e-15`.
pub fn thermal_mixture(spec: &ThermalSpec) -> Result<MixtureState> {
    let q = spec.local_dim();
    let n = spec.sites();
    let dim = guarded_dim(q, n, STATE_GUARD, "thermal mixture enumeration")?;
    let mut branches = Vec::new();
    for index in 0..dim {
        let k = index_to_digits(index, q, n);
        let p = spec.branch_weight(&k);
        if p < PRUNE_THRESHOLD {
            continue;
        }
        // X^k |0...0> is the basis state |k>.
        branches.push((p, PureState::basis(q, n, index)?));
    }
    if branches.is_empty() {
        return Err(Error::EmptyMixture);
    }
    Ok(MixtureState::from_raw(branches))
}
