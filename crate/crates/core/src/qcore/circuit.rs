//! Ordered gate lists and the line-oriented circuit file format:
//!
//! ```text
//! # comment
//! dft_all
//! idft_all
//! oracle ip:11            # builtin oracle name or truth-table path
//! xmask 10
//! gate 1 0.7071067811865476,0 0.7071067811865476,0 0.7071067811865476,0 -0.7071067811865476,0
//! ```
//!
//! `gate` takes a 1-based site followed by `q*q` row-major entries written as
//! `re,im` pairs.

use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    apply_dft_all, apply_diagonal_phase, apply_shift_mask, apply_single_site, check_digits,
    parse_digits, Operator, PureState,
};
use crate::error::{Error, Result};
use crate::oracle::{OracleRegistry, TruthTable};

/// Unitarity tolerance for gate matrices read from files; entries need close
/// to full double precision.
pub const GATE_UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    DftAll,
    InverseDftAll,
    PhaseOracle(TruthTable),
    ShiftMask(Vec<usize>),
    /// `q x q` matrix on a 0-based site.
    SingleSite { site: usize, matrix: Array2<Complex64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    local_dim: usize,
    sites: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(local_dim: usize, sites: usize, gates: Vec<Gate>) -> Result<Self> {
        super::check_local_dim(local_dim)?;
        for g in &gates {
            match g {
                Gate::PhaseOracle(t) => t.check_register(local_dim, sites)?,
                Gate::ShiftMask(k) => check_digits(k, local_dim, sites)?,
                Gate::SingleSite { site, matrix } => {
                    if *site >= sites {
                        return Err(Error::SiteOutOfRange { site: *site, sites });
                    }
                    if matrix.dim() != (local_dim, local_dim) {
                        return Err(Error::DimensionMismatch {
                            expected: local_dim,
                            actual: matrix.nrows(),
                        });
                    }
                }
                Gate::DftAll | Gate::InverseDftAll => {}
            }
        }
        Ok(Self {
            local_dim,
            sites,
            gates,
        })
    }

    /// DFT on all sites, phase oracle, inverse DFT on all sites.
    pub fn fourier_sandwich(table: &TruthTable) -> Result<Self> {
        Self::new(
            table.local_dim(),
            table.arity(),
            vec![
                Gate::DftAll,
                Gate::PhaseOracle(table.clone()),
                Gate::InverseDftAll,
            ],
        )
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Runs the gates on a state vector without forming dense matrices.
    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        if state.local_dim() != self.local_dim || state.sites() != self.sites {
            return Err(Error::DimensionMismatch {
                expected: self.local_dim.pow(self.sites as u32),
                actual: state.dim(),
            });
        }
        let mut s = state.clone();
        for g in &self.gates {
            s = match g {
                Gate::DftAll => apply_dft_all(&s, false),
                Gate::InverseDftAll => apply_dft_all(&s, true),
                Gate::PhaseOracle(t) => apply_diagonal_phase(&s, t)?,
                Gate::ShiftMask(k) => apply_shift_mask(&s, k)?,
                Gate::SingleSite { site, matrix } => apply_single_site(&s, *site, matrix)?,
            };
        }
        Ok(s)
    }

    /// Parses the circuit file format. Oracle references resolve through
    /// `registry`; bare paths are taken relative to `base_dir`.
    pub fn parse(
        text: &str,
        local_dim: usize,
        sites: usize,
        registry: &OracleRegistry,
        base_dir: Option<&Path>,
    ) -> Result<Self> {
        let mut gates = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let content = raw.split('#').next().unwrap_or("");
            let indent = content.len() - content.trim_start().len();
            let mut tokens = tokenize(content);
            let Some((col, keyword)) = tokens.next() else {
                continue;
            };
            let rest: Vec<(usize, &str)> = tokens.collect();
            let expect_args = |count: usize| -> Result<()> {
                if rest.len() != count {
                    return Err(Error::parse(
                        line_no,
                        col + 1,
                        format!(
                            "'{keyword}' takes {count} argument(s), found {}",
                            rest.len()
                        ),
                    ));
                }
                Ok(())
            };
            let at = |e: Error, column: usize| relocate(e, line_no, column + 1);
            let gate = match keyword {
                "dft_all" => {
                    expect_args(0)?;
                    Gate::DftAll
                }
                "idft_all" => {
                    expect_args(0)?;
                    Gate::InverseDftAll
                }
                "oracle" => {
                    expect_args(1)?;
                    let (c, spec) = rest[0];
                    let table = registry
                        .resolve_reference(spec, local_dim, sites, base_dir)
                        .map_err(|e| at(e, c))?;
                    Gate::PhaseOracle(table)
                }
                "xmask" => {
                    expect_args(1)?;
                    let (c, digits) = rest[0];
                    let k = parse_digits(digits, local_dim).map_err(|e| at(e, c))?;
                    check_digits(&k, local_dim, sites).map_err(|e| at(e, c))?;
                    Gate::ShiftMask(k)
                }
                "gate" => {
                    expect_args(1 + local_dim * local_dim)?;
                    let (c, site_text) = rest[0];
                    let site: usize = site_text.parse().map_err(|_| {
                        Error::parse(line_no, c + 1, format!("invalid site '{site_text}'"))
                    })?;
                    if site == 0 || site > sites {
                        return Err(Error::parse(
                            line_no,
                            c + 1,
                            format!("site {site} outside 1..={sites}"),
                        ));
                    }
                    let mut entries = Vec::with_capacity(local_dim * local_dim);
                    for &(c, pair) in &rest[1..] {
                        entries.push(parse_complex(pair).ok_or_else(|| {
                            Error::parse(line_no, c + 1, format!("invalid complex entry '{pair}'"))
                        })?);
                    }
                    let matrix = Array2::from_shape_vec((local_dim, local_dim), entries)
                        .expect("entry count checked");
                    let residual = Operator::single_site(local_dim, 1, 0, &matrix)?
                        .unitarity_residual();
                    if residual > GATE_UNITARITY_TOL {
                        return Err(Error::NotUnitary { residual });
                    }
                    Gate::SingleSite {
                        site: site - 1,
                        matrix,
                    }
                }
                other => {
                    return Err(Error::parse(
                        line_no,
                        indent + 1,
                        format!("unknown gate record '{other}'"),
                    ))
                }
            };
            gates.push(gate);
        }
        Self::new(local_dim, sites, gates)
    }
}

fn tokenize(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut offset = 0;
    line.split_whitespace().map(move |tok| {
        let start = line[offset..].find(tok).map_or(offset, |p| p + offset);
        offset = start + tok.len();
        (start, tok)
    })
}

fn parse_complex(pair: &str) -> Option<Complex64> {
    let (re, im) = pair.split_once(',')?;
    Some(Complex64::new(re.trim().parse().ok()?, im.trim().parse().ok()?))
}

fn relocate(e: Error, line: usize, column: usize) -> Error {
    match e {
        Error::Parse { message, .. } => Error::Parse {
            line,
            column,
            message,
        },
        other => other,
    }
}

/// Dense product of the gate list; the first gate acts first.
pub fn circuit_matrix(circuit: &Circuit) -> Result<Operator> {
    let q = circuit.local_dim();
    let n = circuit.sites();
    let mut acc = Operator::identity(q, n)?;
    for g in circuit.gates() {
        let m = match g {
            Gate::DftAll => Operator::dft_all(q, n, false)?,
            Gate::InverseDftAll => Operator::dft_all(q, n, true)?,
            Gate::PhaseOracle(t) => Operator::diagonal_phase(t)?,
            Gate::ShiftMask(k) => Operator::shift_mask(q, k)?,
            Gate::SingleSite { site, matrix } => Operator::single_site(q, n, *site, matrix)?,
        };
        acc = m.mul(&acc)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new(2, 3, vec![]).unwrap();
        let m = circuit_matrix(&c).unwrap();
        assert_eq!(m, Operator::identity(2, 3).unwrap());
    }

    #[test]
    fn single_hadamard() {
        let c = Circuit::new(2, 1, vec![Gate::DftAll]).unwrap();
        let m = circuit_matrix(&c).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [[h, h], [h, -h]];
        for (r, row) in expected.iter().enumerate() {
            for (col, &e) in row.iter().enumerate() {
                assert!((m.matrix()[(r, col)] - Complex64::new(e, 0.0)).norm() < 1e-15);
            }
        }
        assert!(m.unitarity_residual() < 1e-10);
    }

    #[test]
    fn constant_dj_circuit_squares_to_identity() {
        let t = TruthTable::constant(2, 3, 0).unwrap();
        let u = circuit_matrix(&Circuit::fourier_sandwich(&t).unwrap()).unwrap();
        let sq = u.mul(&u).unwrap();
        assert!(sq.sub(&Operator::identity(2, 3).unwrap()).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn dense_and_state_paths_agree() {
        let reg = OracleRegistry::default();
        let text = "# demo\ndft_all\noracle ip:101\nxmask 011\ngate 2 0,0 1,0 1,0 0,0\nidft_all\n";
        let c = Circuit::parse(text, 2, 3, &reg, None).unwrap();
        assert_eq!(c.gates().len(), 5);
        let u = circuit_matrix(&c).unwrap();
        let s = PureState::basis(2, 3, 5).unwrap();
        let a = u.apply(&s).unwrap();
        let b = c.apply(&s).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        let reg = OracleRegistry::default();
        match Circuit::parse("dft_all\n  bogus\n", 2, 2, &reg, None) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        match Circuit::parse("xmask 1a\n", 2, 2, &reg, None) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (1, 7)),
            other => panic!("unexpected {other:?}"),
        }
        match Circuit::parse("gate 1 1,0 0,0 0,0 x\n", 2, 1, &reg, None) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (1, 20)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Circuit::parse("gate 1 1,0 1,0 0,0 1,0\n", 2, 1, &reg, None),
            Err(Error::NotUnitary { .. })
        ));
    }
}
