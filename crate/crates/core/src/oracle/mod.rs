//! Oracle functions `f: {0..q-1}^n -> {0..q-1}` as explicit value tables,
//! promise classification, enumeration, sampling, and unitary encodings.

mod source;

pub use source::{OracleRegistry, OracleSource};

use ndarray::Array2;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{
    check_digits, check_local_dim, dense_guard, digit_at, guarded_dim, Operator, STATE_GUARD,
};

/// Largest arity for exhaustive balanced enumeration (12870 tables).
pub const ENUMERATION_MAX_ARITY: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TruthTable {
    local_dim: usize,
    arity: usize,
    values: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromiseClass {
    Constant,
    Balanced,
    Neither,
}

impl TruthTable {
    pub fn new(local_dim: usize, arity: usize, values: Vec<usize>) -> Result<Self> {
        let dim = guarded_dim(local_dim, arity, STATE_GUARD, "truth table")?;
        if arity == 0 {
            return Err(Error::Domain("oracle arity must be at least 1".into()));
        }
        if values.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: values.len(),
            });
        }
        if let Some(&v) = values.iter().find(|&&v| v >= local_dim) {
            return Err(Error::DigitOutOfRange {
                digit: v,
                local_dim,
            });
        }
        Ok(Self {
            local_dim,
            arity,
            values,
        })
    }

    pub fn constant(local_dim: usize, arity: usize, value: usize) -> Result<Self> {
        let dim = guarded_dim(local_dim, arity, STATE_GUARD, "truth table")?;
        Self::new(local_dim, arity, vec![value; dim])
    }

    pub fn from_fn<F: FnMut(usize) -> usize>(local_dim: usize, arity: usize, f: F) -> Result<Self> {
        let dim = guarded_dim(local_dim, arity, STATE_GUARD, "truth table")?;
        Self::new(local_dim, arity, (0..dim).map(f).collect())
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn value(&self, x: usize) -> usize {
        self.values[x]
    }

    pub fn check_register(&self, local_dim: usize, sites: usize) -> Result<()> {
        if self.local_dim != local_dim || self.arity != sites {
            return Err(Error::DimensionMismatch {
                expected: local_dim.saturating_pow(sites as u32),
                actual: self.values.len(),
            });
        }
        Ok(())
    }

    /// Parses the text format: one line of digits `0..q-1`, position = basis
    /// index of `x` (site 1 most significant). Lines starting with `#` are
    /// comments; blank lines are ignored.
    pub fn parse(text: &str, local_dim: usize, arity: usize) -> Result<Self> {
        check_local_dim(local_dim)?;
        let dim = guarded_dim(local_dim, arity, STATE_GUARD, "truth table")?;
        let mut found: Option<(usize, usize, Vec<usize>)> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if found.is_some() {
                return Err(Error::parse(line_no, 1, "more than one value line"));
            }
            let indent = raw.len() - raw.trim_start().len();
            let mut values = Vec::with_capacity(dim);
            for (i, ch) in trimmed.chars().enumerate() {
                match ch.to_digit(36) {
                    Some(d) if (d as usize) < local_dim => values.push(d as usize),
                    _ => {
                        return Err(Error::parse(
                            line_no,
                            indent + i + 1,
                            format!("invalid value '{ch}' for local dimension {local_dim}"),
                        ))
                    }
                }
            }
            found = Some((line_no, indent, values));
        }
        let (line_no, indent, values) =
            found.ok_or_else(|| Error::parse(1, 1, "no value line found"))?;
        if values.len() != dim {
            let column = indent + values.len().min(dim) + 1;
            return Err(Error::parse(
                line_no,
                column,
                format!(
                    "expected {dim} values (q^n = {local_dim}^{arity}), found {}",
                    values.len()
                ),
            ));
        }
        Self::new(local_dim, arity, values)
    }

    /// Inverse of [`TruthTable::parse`] without comments.
    pub fn to_text(&self) -> String {
        crate::qcore::format_digits(&self.values)
    }

    fn zero_count(&self) -> usize {
        self.values.iter().filter(|&&v| v == 0).count()
    }
}

/// Constant / balanced / neither. Qubit oracles only.
pub fn classify(table: &TruthTable) -> Result<PromiseClass> {
    if table.local_dim != 2 {
        return Err(Error::QubitOnly(table.local_dim));
    }
    let first = table.values[0];
    if table.values.iter().all(|&v| v == first) {
        return Ok(PromiseClass::Constant);
    }
    if table.zero_count() * 2 == table.values.len() {
        return Ok(PromiseClass::Balanced);
    }
    Ok(PromiseClass::Neither)
}

/// `f(x) = x . y mod q`.
pub fn inner_product_table(y: &[usize], local_dim: usize, arity: usize) -> Result<TruthTable> {
    affine_table(y, 0, local_dim, arity)
}

/// `f(x) = (x . y + b) mod q`.
pub fn affine_table(y: &[usize], b: usize, local_dim: usize, arity: usize) -> Result<TruthTable> {
    check_local_dim(local_dim)?;
    check_digits(y, local_dim, arity)?;
    if b >= local_dim {
        return Err(Error::DigitOutOfRange {
            digit: b,
            local_dim,
        });
    }
    TruthTable::from_fn(local_dim, arity, |x| {
        let dot: usize = y
            .iter()
            .enumerate()
            .map(|(site, &yi)| digit_at(x, site, local_dim, arity) * yi)
            .sum();
        (dot + b) % local_dim
    })
}

/// `C(n, k)` in `u128`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of balanced qubit oracles on `arity` bits, `C(2^n, 2^(n-1))`.
pub fn balanced_count(arity: usize) -> u128 {
    let dim = 1u64 << arity;
    binomial(dim, dim / 2)
}

/// Lexicographic stream of every balanced qubit table on `arity` bits.
#[derive(Clone, Debug)]
pub struct BalancedTables {
    arity: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for BalancedTables {
    type Item = TruthTable;

    fn next(&mut self) -> Option<TruthTable> {
        let current = self.next.take()?;
        let mut successor = current.clone();
        if next_permutation(&mut successor) {
            self.next = Some(successor);
        }
        Some(TruthTable {
            local_dim: 2,
            arity: self.arity,
            values: current,
        })
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let pivot = i - 1;
    let j = (i..v.len()).rev().find(|&j| v[j] > v[pivot]).expect("successor exists");
    v.swap(pivot, j);
    v[i..].reverse();
    true
}

/// Every balanced table on `arity <= 4` bits exactly once, in lexicographic
/// order of the value vector.
pub fn enumerate_balanced(arity: usize) -> Result<BalancedTables> {
    if arity == 0 || arity > ENUMERATION_MAX_ARITY {
        return Err(Error::GuardExceeded {
            what: "balanced enumeration arity",
            dim: arity,
            guard: ENUMERATION_MAX_ARITY,
        });
    }
    let dim = 1usize << arity;
    let mut first = vec![0; dim];
    first[dim / 2..].iter_mut().for_each(|v| *v = 1);
    Ok(BalancedTables {
        arity,
        next: Some(first),
    })
}

/// Uniformly random balanced table from a seeded shuffle.
pub fn sample_balanced(arity: usize, seed: u64) -> Result<TruthTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_balanced_with(arity, &mut rng)
}

pub(crate) fn sample_balanced_with<R: rand::Rng + ?Sized>(
    arity: usize,
    rng: &mut R,
) -> Result<TruthTable> {
    let dim = guarded_dim(2, arity, STATE_GUARD, "truth table")?;
    let mut values = vec![0; dim];
    values[dim / 2..].iter_mut().for_each(|v| *v = 1);
    values.shuffle(rng);
    TruthTable::new(2, arity, values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineCount {
    pub affine_balanced: u128,
    pub total_balanced: u128,
}

/// Counts balanced members of the `2 * 2^n` affine tables `x.y + b` over GF(2).
pub fn count_affine_balanced(arity: usize) -> Result<AffineCount> {
    if arity == 0 || arity > ENUMERATION_MAX_ARITY {
        return Err(Error::GuardExceeded {
            what: "affine count arity",
            dim: arity,
            guard: ENUMERATION_MAX_ARITY,
        });
    }
    let mut count = 0u128;
    for yi in 0..(1usize << arity) {
        let y = crate::qcore::index_to_digits(yi, 2, arity);
        for b in 0..2 {
            if classify(&affine_table(&y, b, 2, arity)?)? == PromiseClass::Balanced {
                count += 1;
            }
        }
    }
    Ok(AffineCount {
        affine_balanced: count,
        total_balanced: balanced_count(arity),
    })
}

/// Permutation `|x>|a> -> |x>|a xor f(x)>` on `n + 1` qubits, the ancilla
/// being the last (least significant) site.
pub fn full_oracle_matrix(table: &TruthTable) -> Result<Operator> {
    if table.local_dim != 2 {
        return Err(Error::QubitOnly(table.local_dim));
    }
    let sites = table.arity + 1;
    let dim = guarded_dim(2, sites, dense_guard(), "full oracle")?;
    let mut m = Array2::from_elem((dim, dim), Complex64::new(0.0, 0.0));
    for col in 0..dim {
        let x = col >> 1;
        let a = col & 1;
        let row = (x << 1) | (a ^ table.values[x]);
        m[(row, col)] = Complex64::new(1.0, 0.0);
    }
    Operator::new(2, sites, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{apply_diagonal_phase, apply_dft_all, PureState};
    use proptest::prelude::*;

    fn t(values: &[usize]) -> TruthTable {
        let n = values.len().trailing_zeros() as usize;
        TruthTable::new(2, n, values.to_vec()).unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&t(&[1, 1, 1, 1])).unwrap(), PromiseClass::Constant);
        assert_eq!(classify(&t(&[0, 1, 1, 0])).unwrap(), PromiseClass::Balanced);
        assert_eq!(classify(&t(&[0, 0, 0, 1])).unwrap(), PromiseClass::Neither);
        let qutrit = TruthTable::constant(3, 1, 0).unwrap();
        assert!(matches!(classify(&qutrit), Err(Error::QubitOnly(3))));
    }

    #[test]
    fn inner_product_and_affine_examples() {
        assert_eq!(
            inner_product_table(&[0, 0], 2, 2).unwrap(),
            TruthTable::constant(2, 2, 0).unwrap()
        );
        assert_eq!(inner_product_table(&[1, 1], 2, 2).unwrap().values(), &[0, 1, 1, 0]);
        assert_eq!(
            affine_table(&[0, 0, 0], 1, 2, 3).unwrap(),
            TruthTable::constant(2, 3, 1).unwrap()
        );
        assert_eq!(affine_table(&[1], 1, 2, 1).unwrap().values(), &[1, 0]);
        assert_eq!(inner_product_table(&[2, 1], 3, 2).unwrap().value(7), (2 * 2 + 1) % 3);
    }

    #[test]
    fn nonzero_inner_products_are_balanced_exhaustively() {
        for n in 1..=4 {
            for yi in 1..(1usize << n) {
                let y = crate::qcore::index_to_digits(yi, 2, n);
                for b in 0..2 {
                    let table = affine_table(&y, b, 2, n).unwrap();
                    let zeros = table.values().iter().filter(|&&v| v == 0).count();
                    assert_eq!(zeros, 1 << (n - 1));
                    assert_eq!(classify(&table).unwrap(), PromiseClass::Balanced);
                }
            }
            let y = vec![0; n];
            assert_eq!(
                classify(&affine_table(&y, 1, 2, n).unwrap()).unwrap(),
                PromiseClass::Constant
            );
        }
    }

    #[test]
    fn enumeration_counts_and_order() {
        let expected = [2usize, 6, 70, 12870];
        for n in 1..=4 {
            let tables: Vec<TruthTable> = enumerate_balanced(n).unwrap().collect();
            assert_eq!(tables.len(), expected[n - 1]);
            assert_eq!(tables.len() as u128, balanced_count(n));
            assert!(tables.windows(2).all(|w| w[0].values() < w[1].values()));
            assert!(tables
                .iter()
                .all(|tb| classify(tb).unwrap() == PromiseClass::Balanced));
        }
        let two: Vec<String> = enumerate_balanced(2).unwrap().map(|t| t.to_text()).collect();
        assert_eq!(two, ["0011", "0101", "0110", "1001", "1010", "1100"]);
        assert!(enumerate_balanced(5).is_err());
        assert!(enumerate_balanced(0).is_err());
    }

    #[test]
    fn sampling_is_balanced_and_deterministic() {
        for seed in 0..20 {
            let a = sample_balanced(5, seed).unwrap();
            assert_eq!(classify(&a).unwrap(), PromiseClass::Balanced);
            assert_eq!(a, sample_balanced(5, seed).unwrap());
        }
    }

    #[test]
    fn sampling_is_uniform_over_two_bit_tables() {
        // 6000 draws over 6 tables: expected 1000 each, 4 sigma ~ 4 * sqrt(6000 * 1/6 * 5/6) = 115.
        let all: Vec<TruthTable> = enumerate_balanced(2).unwrap().collect();
        let mut counts = vec![0usize; all.len()];
        for seed in 0..6000 {
            let s = sample_balanced(2, seed).unwrap();
            counts[all.iter().position(|x| *x == s).unwrap()] += 1;
        }
        for c in counts {
            assert!((850..=1150).contains(&c), "count {c}");
        }
    }

    #[test]
    fn affine_counts() {
        let got: Vec<(u128, u128)> = (2..=4)
            .map(|n| {
                let c = count_affine_balanced(n).unwrap();
                (c.affine_balanced, c.total_balanced)
            })
            .collect();
        assert_eq!(got, vec![(6, 6), (14, 70), (30, 12870)]);
        for n in 2..=4u32 {
            assert_eq!(got[(n - 2) as usize].0, 2 * (2u128.pow(n) - 1));
        }
    }

    #[test]
    fn every_two_bit_balanced_function_is_affine() {
        let affine: Vec<TruthTable> = (0..4)
            .flat_map(|yi| {
                let y = crate::qcore::index_to_digits(yi, 2, 2);
                (0..2).map(move |b| affine_table(&y, b, 2, 2).unwrap())
            })
            .filter(|tb| classify(tb).unwrap() == PromiseClass::Balanced)
            .collect();
        for b in enumerate_balanced(2).unwrap() {
            assert!(affine.contains(&b));
        }
    }

    #[test]
    fn full_oracle_properties() {
        let zero = full_oracle_matrix(&TruthTable::constant(2, 2, 0).unwrap()).unwrap();
        assert_eq!(zero, Operator::identity(2, 3).unwrap());
        for table in enumerate_balanced(2).unwrap() {
            let u = full_oracle_matrix(&table).unwrap();
            assert!(u.unitarity_residual() < 1e-15);
            assert!(u.matrix().iter().all(|z| z.im == 0.0));
            assert_eq!(u.mul(&u).unwrap(), Operator::identity(2, 3).unwrap());
        }
        assert!(full_oracle_matrix(&TruthTable::constant(2, 8, 0).unwrap()).is_err());
    }

    #[test]
    fn phase_kickback_on_basis_inputs() {
        let table = t(&[0, 1, 1, 1, 0, 0, 1, 0]);
        let u = full_oracle_matrix(&table).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for x in 0..8 {
            let mut amps = vec![Complex64::new(0.0, 0.0); 16];
            amps[2 * x] = Complex64::new(h, 0.0);
            amps[2 * x + 1] = Complex64::new(-h, 0.0);
            let input = PureState::new(2, 4, amps.clone()).unwrap();
            let out = u.apply(&input).unwrap();
            let sign = if table.value(x) == 1 { -1.0 } else { 1.0 };
            for (o, a) in out.amplitudes().iter().zip(&amps) {
                assert!((o - a * sign).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn parse_and_render() {
        let table = TruthTable::parse("# xor\n0110\n", 2, 2).unwrap();
        assert_eq!(table.values(), &[0, 1, 1, 0]);
        assert_eq!(table.to_text(), "0110");
        match TruthTable::parse("# c\n011\n", 2, 2) {
            Err(Error::Parse { line, column, message }) => {
                assert_eq!((line, column), (2, 4));
                assert!(message.contains("expected 4"));
            }
            other => panic!("unexpected {other:?}"),
        }
        match TruthTable::parse("01210\n", 2, 2) {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(TruthTable::parse("0120\n0000\n", 3, 1).is_err());
        assert!(TruthTable::parse("# only comments\n", 2, 1).is_err());
        assert_eq!(TruthTable::parse("012", 3, 1).unwrap().values(), &[0, 1, 2]);
    }

    proptest! {
        #[test]
        fn kickback_matches_phase_oracle_on_random_states(
            n in 1usize..=4,
            bits in prop::collection::vec(0usize..2, 16),
            raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        ) {
            let dim = 1 << n;
            let table = TruthTable::new(2, n, bits[..dim].to_vec()).unwrap();
            let mut amps: Vec<Complex64> =
                raw[..dim].iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            amps[0] += Complex64::new(0.5, 0.0);
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            amps.iter_mut().for_each(|a| *a /= norm);
            let reg = PureState::new(2, n, amps.clone()).unwrap();
            let minus = apply_dft_all(&PureState::basis(2, 1, 1).unwrap(), false);
            let joint: Vec<Complex64> = amps
                .iter()
                .flat_map(|a| minus.amplitudes().iter().map(move |m| a * m))
                .collect();
            let full = full_oracle_matrix(&table).unwrap()
                .apply(&PureState::new(2, n + 1, joint).unwrap()).unwrap();
            let phased = apply_diagonal_phase(&reg, &table).unwrap();
            for (i, o) in full.amplitudes().iter().enumerate() {
                let expected = phased.amplitude(i >> 1) * minus.amplitude(i & 1);
                prop_assert!((o - expected).norm() < 1e-12);
            }
        }
    }
}
