use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_digits, digits_to_index, guarded_dim, NORM_TOL, STATE_GUARD};
use crate::error::{Error, Result};

/// A normalized amplitude vector over `sites` sites of dimension `local_dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    local_dim: usize,
    sites: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Validating constructor: length `q^n` and unit norm within `1e-10`.
    pub fn new(local_dim: usize, sites: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = guarded_dim(local_dim, sites, STATE_GUARD, "state vector")?;
        if sites == 0 {
            return Err(Error::Domain("a register needs at least one site".into()));
        }
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            local_dim,
            sites,
            amplitudes,
        })
    }

    /// Builds from amplitudes that are normalized by construction.
    pub(crate) fn from_raw(local_dim: usize, sites: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), local_dim.pow(sites as u32));
        Self {
            local_dim,
            sites,
            amplitudes,
        }
    }

    /// Computational basis state `|index>`.
    pub fn basis(local_dim: usize, sites: usize, index: usize) -> Result<Self> {
        let dim = guarded_dim(local_dim, sites, STATE_GUARD, "state vector")?;
        if sites == 0 {
            return Err(Error::Domain("a register needs at least one site".into()));
        }
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: index,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self::from_raw(local_dim, sites, amplitudes))
    }

    pub fn basis_digits(local_dim: usize, digits: &[usize]) -> Result<Self> {
        check_digits(digits, local_dim, digits.len())?;
        Self::basis(local_dim, digits.len(), digits_to_index(digits, local_dim))
    }

    /// `|0...0>`.
    pub fn ground(local_dim: usize, sites: usize) -> Result<Self> {
        Self::basis(local_dim, sites, 0)
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Basis-state probabilities `|amplitude|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Distance after removing the global phase: `sqrt(1 - |<a|b>|^2)` clamped at 0.
    pub fn phase_insensitive_distance(&self, other: &PureState) -> Result<f64> {
        let overlap = self.inner(other)?.norm_sqr();
        Ok((1.0 - overlap).max(0.0).sqrt())
    }

    pub(crate) fn check_same_shape(&self, other: &PureState) -> Result<()> {
        if self.local_dim != other.local_dim || self.sites != other.sites {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.sites {
            return Err(Error::SiteOutOfRange {
                site,
                sites: self.sites,
            });
        }
        Ok(())
    }
}
