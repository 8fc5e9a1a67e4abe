use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{expectation_site, expectation_zq_power, PureState};
use crate::error::{Error, Result};

/// Probabilistic ensemble of pure branches sharing one register shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureState {
    branches: Vec<(f64, PureState)>,
}

impl MixtureState {
    pub fn new(branches: Vec<(f64, PureState)>) -> Result<Self> {
        let first = branches.first().ok_or(Error::EmptyMixture)?;
        let (q, n) = (first.1.local_dim(), first.1.sites());
        let mut total = 0.0;
        for (w, s) in &branches {
            if *w < 0.0 || !w.is_finite() {
                return Err(Error::InvalidProbability {
                    value: *w,
                    context: "mixture weight".into(),
                });
            }
            if s.local_dim() != q || s.sites() != n {
                return Err(Error::DimensionMismatch {
                    expected: first.1.dim(),
                    actual: s.dim(),
                });
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbability {
                value: total,
                context: "mixture weights must sum to 1".into(),
            });
        }
        Ok(Self { branches })
    }

    pub(crate) fn from_raw(branches: Vec<(f64, PureState)>) -> Self {
        Self { branches }
    }

    pub fn pure(state: PureState) -> Self {
        Self {
            branches: vec![(1.0, state)],
        }
    }

    pub fn branches(&self) -> &[(f64, PureState)] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(|(w, _)| w).sum()
    }

    pub fn local_dim(&self) -> Option<usize> {
        self.branches.first().map(|(_, s)| s.local_dim())
    }

    pub fn sites(&self) -> Option<usize> {
        self.branches.first().map(|(_, s)| s.sites())
    }

    /// Applies `op` to every branch, keeping weights.
    pub fn map_branches<F>(&self, mut op: F) -> Result<Self>
    where
        F: FnMut(&PureState) -> Result<PureState>,
    {
        let branches = self
            .branches
            .iter()
            .map(|(w, s)| Ok((*w, op(s)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { branches })
    }

    /// Weighted marginal population of each digit on each site: `[site][digit]`.
    pub fn site_populations(&self) -> Result<Vec<Vec<f64>>> {
        let (q, n) = match self.branches.first() {
            Some((_, s)) => (s.local_dim(), s.sites()),
            None => return Err(Error::EmptyMixture),
        };
        let mut pops = vec![vec![0.0; q]; n];
        for (w, s) in &self.branches {
            for (x, a) in s.amplitudes().iter().enumerate() {
                let p = w * a.norm_sqr();
                if p == 0.0 {
                    continue;
                }
                let mut rest = x;
                for site in (0..n).rev() {
                    pops[site][rest % q] += p;
                    rest /= q;
                }
            }
        }
        Ok(pops)
    }
}

/// Weighted `<Z_q^m>` over the branches, summed in branch order.
pub fn mixture_expectation(mix: &MixtureState, site: usize, m: usize) -> Result<Complex64> {
    if mix.is_empty() {
        return Err(Error::EmptyMixture);
    }
    mix.branches()
        .iter()
        .try_fold(Complex64::new(0.0, 0.0), |acc, (w, s)| {
            Ok(acc + expectation_zq_power(s, site, m)? * *w)
        })
}

/// Weighted qubit site signal `<sigma_z>` with eigenvalue -1 on `|0>`.
pub fn mixture_expectation_site(mix: &MixtureState, site: usize) -> Result<f64> {
    if mix.is_empty() {
        return Err(Error::EmptyMixture);
    }
    mix.branches()
        .iter()
        .try_fold(0.0, |acc, (w, s)| Ok(acc + w * expectation_site(s, site)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit_mix(w0: f64) -> MixtureState {
        MixtureState::new(vec![
            (w0, PureState::basis(2, 1, 0).unwrap()),
            (1.0 - w0, PureState::basis(2, 1, 1).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn single_branch_matches_pure_expectation() {
        let s = PureState::basis(2, 2, 2).unwrap();
        let m = MixtureState::pure(s.clone());
        for i in 0..2 {
            assert_eq!(
                mixture_expectation_site(&m, i).unwrap(),
                expectation_site(&s, i).unwrap()
            );
        }
    }

    #[test]
    fn weighted_examples() {
        assert_eq!(mixture_expectation_site(&qubit_mix(0.5), 0).unwrap(), 0.0);
        assert_eq!(mixture_expectation_site(&qubit_mix(0.75), 0).unwrap(), -0.5);
        let z = mixture_expectation(&qubit_mix(0.75), 0, 1).unwrap();
        assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(matches!(MixtureState::new(vec![]), Err(Error::EmptyMixture)));
        assert!(MixtureState::new(vec![(0.5, PureState::ground(2, 1).unwrap())]).is_err());
        assert!(MixtureState::new(vec![
            (0.5, PureState::ground(2, 1).unwrap()),
            (0.5, PureState::ground(2, 2).unwrap()),
        ])
        .is_err());
        assert!(MixtureState::new(vec![
            (1.5, PureState::ground(2, 1).unwrap()),
            (-0.5, PureState::ground(2, 1).unwrap()),
        ])
        .is_err());
    }

    #[test]
    fn populations_of_basis_mixture() {
        let p = qubit_mix(0.75).site_populations().unwrap();
        assert_eq!(p, vec![vec![0.75, 0.25]]);
    }
}
