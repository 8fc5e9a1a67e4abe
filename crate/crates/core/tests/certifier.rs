//! Channel construction and proportionality certification.

use bulkq_core::hqa::{
    adjoint_apply, bitflip_channel, certify, certify_pointwise, conjugated_channel,
    default_observables, dj_circuit, generalized_channel, random_circuit, spanning_states,
    Observable, UNITARY_TOL,
};
use bulkq_core::models::run_dj_state;
use bulkq_core::oracle::{inner_product_table, sample_balanced};
use bulkq_core::qcore::{
    circuit_matrix, root_of_unity, KrausChannel, Operator, ThermalSpec,
};
use bulkq_core::Error;
use num_complex::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn shift_channels() {
    let pure = bitflip_channel(&ThermalSpec::pure(2, 3).unwrap()).unwrap();
    assert_eq!(pure.len(), 1);
    assert!(pure.operators()[0].max_abs_diff(&Operator::identity(2, 3).unwrap()).unwrap() < 1e-15);

    let e = bitflip_channel(&ThermalSpec::qubits(&[0.75]).unwrap()).unwrap();
    let x = Operator::shift_mask(2, &[1]).unwrap();
    let want = [Operator::identity(2, 1).unwrap().scale(c(0.75f64.sqrt())), x.scale(c(0.5))];
    for (got, want) in e.operators().iter().zip(&want) {
        assert!(got.max_abs_diff(want).unwrap() < 1e-15);
    }

    let e3 = bitflip_channel(&ThermalSpec::new(3, vec![vec![0.5, 0.3, 0.2]]).unwrap()).unwrap();
    assert_eq!(e3.len(), 3);
    for (j, (op, r)) in e3.operators().iter().zip([0.5f64, 0.3, 0.2]).enumerate() {
        let want = Operator::shift_mask(3, &[j]).unwrap().scale(c(r.sqrt()));
        assert!(op.max_abs_diff(&want).unwrap() < 1e-15);
    }
    for ch in [&pure, &e, &e3] {
        assert!(ch.completeness_residual() <= 1e-9);
    }
}

#[test]
fn dj_circuit_leaves_the_channel_unchanged() {
    let spec = ThermalSpec::qubits(&[0.8, 0.6, 0.95]).unwrap();
    let e = bitflip_channel(&spec).unwrap();
    for seed in 0..5 {
        let u = circuit_matrix(&dj_circuit(&sample_balanced(3, seed).unwrap()).unwrap()).unwrap();
        let f = conjugated_channel(&u, &e).unwrap();
        assert!(f.termwise_distance(&e).unwrap() <= 1e-10);
        assert!(f.completeness_residual() <= 1e-10);
    }
    let id = conjugated_channel(&Operator::identity(2, 3).unwrap(), &e).unwrap();
    assert!(id.termwise_distance(&e).unwrap() < 1e-15);
}

#[test]
fn generalized_forms() {
    let spec = ThermalSpec::qubits(&[0.8, 0.6]).unwrap();
    let e = bitflip_channel(&spec).unwrap();
    let u = circuit_matrix(&random_circuit(2, 2, 4).unwrap()).unwrap();
    let states = spanning_states(2, 2).unwrap();

    // V = U reduces to conjugation.
    let v = KrausChannel::unitary(&u, UNITARY_TOL).unwrap();
    let g = generalized_channel(&v, &e, &u).unwrap();
    let conj = conjugated_channel(&u, &e).unwrap();
    assert!(g.action_distance(&conj, &states).unwrap() < 1e-12);

    // V = U . E', E = identity: Kraus {U A'_j U^dagger}.
    let e2 = bitflip_channel(&ThermalSpec::qubits(&[0.7, 0.9]).unwrap()).unwrap();
    let v = e2.then(&KrausChannel::unitary(&u, UNITARY_TOL).unwrap()).unwrap();
    let g = generalized_channel(&v, &KrausChannel::identity(2, 2).unwrap(), &u).unwrap();
    let want = conjugated_channel(&u, &e2).unwrap();
    assert!(g.action_distance(&want, &states).unwrap() < 1e-12);

    // V = E = identity gives conjugation by U^dagger.
    let id = KrausChannel::identity(2, 2).unwrap();
    let g = generalized_channel(&id, &id, &u).unwrap();
    let want = KrausChannel::unitary(&u.adjoint(), UNITARY_TOL).unwrap();
    assert!(g.action_distance(&want, &states).unwrap() < 1e-12);
}

#[test]
fn heisenberg_images() {
    let z = Operator::site_sigma_z(1, 0).unwrap();
    let id = KrausChannel::identity(2, 1).unwrap();
    assert!(adjoint_apply(&id, &z).unwrap().max_abs_diff(&z).unwrap() < 1e-15);
    let flip = bitflip_channel(&ThermalSpec::qubits(&[0.85]).unwrap()).unwrap();
    let img = adjoint_apply(&flip, &z).unwrap();
    assert!(img.max_abs_diff(&z.scale(c(0.7))).unwrap() < 1e-12);

    let r = [0.5, 0.3, 0.2];
    let shift = bitflip_channel(&ThermalSpec::new(3, vec![r.to_vec()]).unwrap()).unwrap();
    let zq = Operator::zq_power(3, 1, 0, 1).unwrap();
    let factor: Complex64 = r.iter().enumerate().map(|(j, &p)| root_of_unity(3, j) * p).sum();
    let img = adjoint_apply(&shift, &zq).unwrap();
    assert!(img.max_abs_diff(&zq.scale(factor)).unwrap() < 1e-12);
}

#[test]
fn certify_examples() {
    let spec = ThermalSpec::qubits(&[0.8, 0.6]).unwrap();
    let u = circuit_matrix(&dj_circuit(&inner_product_table(&[1, 1], 2, 2).unwrap()).unwrap()).unwrap();
    let obs = default_observables(2, 2).unwrap();
    let r = certify(&conjugated_channel(&u, &bitflip_channel(&spec).unwrap()).unwrap(), &obs, 1e-9).unwrap();
    assert!(r.pass);
    assert!(r.max_residual() <= 1e-10);
    let cs = r.constants();
    assert!((cs[0] - c(0.6)).norm() < 1e-12 && (cs[1] - c(0.2)).norm() < 1e-12);

    let mixed = ThermalSpec::uniform_qubits(0.5, 2).unwrap();
    let r = certify(&conjugated_channel(&u, &bitflip_channel(&mixed).unwrap()).unwrap(), &obs, 1e-9).unwrap();
    assert!(r.constants().iter().all(|c| c.norm() <= 1e-12));

    let failing = (0..20).filter(|&seed| {
        let u = circuit_matrix(&random_circuit(2, 2, seed).unwrap()).unwrap();
        let f = conjugated_channel(&u, &bitflip_channel(&spec).unwrap()).unwrap();
        !certify(&f, &obs, 1e-9).unwrap().pass
    });
    assert_eq!(failing.count(), 20);
}

#[test]
fn pointwise_agrees_with_adjoint() {
    let spec = ThermalSpec::qubits(&[0.9, 0.65]).unwrap();
    let e = bitflip_channel(&spec).unwrap();
    let obs = default_observables(2, 2).unwrap();
    let basis = spanning_states(2, 2).unwrap();
    for seed in [1, 2, 3] {
        let u = circuit_matrix(&random_circuit(2, 2, seed).unwrap()).unwrap();
        let f = conjugated_channel(&u, &e).unwrap();
        let a = certify(&f, &obs, 1e-9).unwrap();
        let p = certify_pointwise(&f, &obs, &basis, 1e-9).unwrap();
        assert_eq!(a.pass, p.pass);
    }

    // DJ output states of random balanced tables give the adjoint constants.
    let mut states = Vec::new();
    for seed in 0..5 {
        let t = sample_balanced(2, seed).unwrap();
        states.push(Operator::density(&run_dj_state(&t).unwrap()).unwrap());
    }
    let u = circuit_matrix(&dj_circuit(&sample_balanced(2, 11).unwrap()).unwrap()).unwrap();
    let f = conjugated_channel(&u, &e).unwrap();
    let a = certify(&f, &obs, 1e-9).unwrap();
    let p = certify_pointwise(&f, &obs, &states, 1e-9).unwrap();
    for (x, y) in a.constants().iter().zip(p.constants()) {
        assert!((x - y).norm() < 1e-9);
    }

    let maximally_mixed = Operator::identity(2, 2).unwrap().scale(c(0.25));
    let err = certify_pointwise(&f, &obs, &[maximally_mixed], 1e-9).unwrap_err();
    assert_eq!(err, Error::DegenerateFit("sigma_z[1]".into()));
}

#[test]
fn zero_observable_is_rejected() {
    let f = KrausChannel::identity(2, 1).unwrap();
    let zero = Observable {
        label: "zero".into(),
        operator: Operator::zeros(2, 1).unwrap(),
    };
    assert_eq!(certify(&f, &[zero], 1e-9).unwrap_err(), Error::ZeroObservable);
}
