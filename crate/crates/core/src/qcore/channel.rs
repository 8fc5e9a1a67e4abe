use serde::{Deserialize, Serialize};

use super::Operator;
use crate::error::{Error, Result};

/// Completeness tolerance `|| sum_k B_k^dagger B_k - I ||_F` for constructed channels.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// CPTP map `rho -> sum_k B_k rho B_k^dagger` in Kraus form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausChannel {
    local_dim: usize,
    sites: usize,
    operators: Vec<Operator>,
}

impl KrausChannel {
    /// Validates shapes and completeness within [`COMPLETENESS_TOL`].
    pub fn new(operators: Vec<Operator>) -> Result<Self> {
        let channel = Self::unchecked(operators)?;
        let residual = channel.completeness_residual();
        if residual > COMPLETENESS_TOL {
            return Err(Error::IncompleteChannel { residual });
        }
        Ok(channel)
    }

    pub(crate) fn unchecked(operators: Vec<Operator>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::Domain("a channel needs at least one Kraus operator".into()))?;
        for op in &operators[1..] {
            first.check_same_shape(op)?;
        }
        Ok(Self {
            local_dim: first.local_dim(),
            sites: first.sites(),
            operators,
        })
    }

    pub fn identity(local_dim: usize, sites: usize) -> Result<Self> {
        Ok(Self {
            local_dim,
            sites,
            operators: vec![Operator::identity(local_dim, sites)?],
        })
    }

    /// Unitary channel `rho -> U rho U^dagger`.
    pub fn unitary(u: &Operator, tol: f64) -> Result<Self> {
        u.check_unitary(tol)?;
        Ok(Self {
            local_dim: u.local_dim(),
            sites: u.sites(),
            operators: vec![u.clone()],
        })
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub(crate) fn check_shape(&self, op: &Operator) -> Result<()> {
        if op.local_dim() != self.local_dim || op.sites() != self.sites {
            return Err(Error::DimensionMismatch {
                expected: self.operators[0].dim(),
                actual: op.dim(),
            });
        }
        Ok(())
    }

    pub fn completeness_residual(&self) -> f64 {
        let sum = self
            .operators
            .iter()
            .map(|b| b.adjoint().mul(b).expect("shapes checked"))
            .reduce(|a, b| a.add(&b).expect("shapes checked"))
            .expect("non-empty");
        let id = Operator::identity(self.local_dim, self.sites).expect("shape already guarded");
        sum.sub(&id).expect("same shape").frobenius_norm()
    }

    /// Schroedinger picture: `sum_k B_k rho B_k^dagger`.
    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        self.check_shape(rho)?;
        let mut acc = Operator::zeros(self.local_dim, self.sites)?;
        for b in &self.operators {
            acc = acc.add(&b.mul(rho)?.mul(&b.adjoint())?)?;
        }
        Ok(acc)
    }

    /// Heisenberg picture: `sum_k B_k^dagger O B_k`.
    pub fn adjoint_apply(&self, observable: &Operator) -> Result<Operator> {
        self.check_shape(observable)?;
        let mut acc = Operator::zeros(self.local_dim, self.sites)?;
        for b in &self.operators {
            acc = acc.add(&b.adjoint().mul(observable)?.mul(b)?)?;
        }
        Ok(acc)
    }

    /// `other` after `self`: Kraus operators `{C_j B_k}`.
    pub fn then(&self, other: &KrausChannel) -> Result<KrausChannel> {
        if other.local_dim != self.local_dim || other.sites != self.sites {
            return Err(Error::DimensionMismatch {
                expected: self.operators[0].dim(),
                actual: other.operators[0].dim(),
            });
        }
        let mut ops = Vec::with_capacity(self.len() * other.len());
        for c in &other.operators {
            for b in &self.operators {
                ops.push(c.mul(b)?);
            }
        }
        Self::unchecked(ops)
    }

    /// Sum over Kraus pairs of `|| A_k - B_k ||_F`; zero iff the two lists match term by term.
    pub fn termwise_distance(&self, other: &KrausChannel) -> Result<f64> {
        if self.len() != other.len() {
            return Ok(f64::INFINITY);
        }
        self.operators
            .iter()
            .zip(&other.operators)
            .try_fold(0.0, |acc, (a, b)| Ok(acc + a.sub(b)?.frobenius_norm()))
    }

    /// `max_rho || self(rho) - other(rho) ||_F` over the supplied states.
    pub fn action_distance(&self, other: &KrausChannel, states: &[Operator]) -> Result<f64> {
        states.iter().try_fold(0.0f64, |acc, rho| {
            let d = self.apply(rho)?.sub(&other.apply(rho)?)?.frobenius_norm();
            Ok(acc.max(d))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn incomplete_sets_are_rejected() {
        let half = Operator::identity(2, 1).unwrap().scale(c(0.5));
        assert!(matches!(
            KrausChannel::new(vec![half]),
            Err(Error::IncompleteChannel { .. })
        ));
    }

    #[test]
    fn adjoint_of_bitflip_on_sigma_z() {
        let x = Operator::shift_mask(2, &[1]).unwrap();
        let id = Operator::identity(2, 1).unwrap();
        let ch = KrausChannel::new(vec![id.scale(c(0.75f64.sqrt())), x.scale(c(0.25f64.sqrt()))])
            .unwrap();
        let z = Operator::site_sigma_z(1, 0).unwrap();
        let out = ch.adjoint_apply(&z).unwrap();
        assert!(out.sub(&z.scale(c(0.5))).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn composition_applies_in_order() {
        let x = Operator::shift_mask(2, &[1]).unwrap();
        let flip = KrausChannel::unitary(&x, 1e-12).unwrap();
        let h = Operator::dft_all(2, 1, false).unwrap();
        let had = KrausChannel::unitary(&h, 1e-12).unwrap();
        let rho = Operator::new(2, 1, arr2(&[[c(1.0), c(0.0)], [c(0.0), c(0.0)]])).unwrap();
        let seq = flip.then(&had).unwrap().apply(&rho).unwrap();
        let manual = had.apply(&flip.apply(&rho).unwrap()).unwrap();
        assert!(seq.sub(&manual).unwrap().frobenius_norm() < 1e-15);
    }
}
