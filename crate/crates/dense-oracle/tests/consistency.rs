//! Cross-module basis consistency: TT objects built by spin-model must match
//! the oracle's dense matrices entry for entry. Every later equivalence test
//! leans on this.

use dense_oracle::{dense_detection, dense_hamiltonian, dense_liouvillian, DenseLimits};
use ndarray::prelude::*;
use spin_model::{
    analytic_total_sz, analytic_zz_chain, commutation_superoperator, detection_state,
    hamiltonian_terms, Coupling, Spin, SpinSystem, TWO_PI,
};
use tt_core::C64;

fn spin(label: &str, isotope: &str, offset_hz: f64) -> Spin {
    Spin {
        label: label.to_string(),
        isotope: isotope.to_string(),
        offset_hz,
    }
}

fn rel2(got: &Array2<C64>, want: &Array2<C64>) -> f64 {
    let num: f64 = (got - want).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = want.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

fn limits() -> DenseLimits {
    DenseLimits::default()
}

#[test]
fn analytic_total_sz_matches_a_unit_offset_hamiltonian() {
    // offsets of 1/(2 pi) Hz make the Hamiltonian exactly the total-Sz sum
    let n = 5;
    let spins = (0..n)
        .map(|k| spin(&format!("s{k}"), "1H", 1.0 / TWO_PI))
        .collect();
    let sys = SpinSystem {
        spins,
        couplings: vec![],
        damping_mu: 1.0,
    };
    let want = dense_hamiltonian(&sys, &limits()).unwrap();
    let got = analytic_total_sz(n).unwrap().to_dense().unwrap();
    assert!(rel2(&got, &want) <= 1e-12);
}

#[test]
fn analytic_zz_chain_matches_an_all_pairs_coupling_hamiltonian() {
    // hetero pairs at 1/(2 pi) Hz leave only zz terms, one per pair
    let n = 4;
    let isotopes = ["1H", "15N", "13C", "19F"];
    let spins = (0..n)
        .map(|k| spin(&format!("s{k}"), isotopes[k], 0.0))
        .collect();
    let mut couplings = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            couplings.push(Coupling {
                i,
                j,
                j_hz: 1.0 / TWO_PI,
            });
        }
    }
    let sys = SpinSystem {
        spins,
        couplings,
        damping_mu: 1.0,
    };
    let want = dense_hamiltonian(&sys, &limits()).unwrap();
    let got = analytic_zz_chain(n).unwrap().to_dense().unwrap();
    assert!(rel2(&got, &want) <= 1e-12);
}

#[test]
fn superoperator_cp_expansion_matches_the_permuted_global_liouvillian() {
    let sys = SpinSystem {
        spins: vec![
            spin("H1", "1H", 310.0),
            spin("N1", "15N", -2450.0),
            spin("C1", "13C", 870.0),
        ],
        couplings: vec![
            Coupling { i: 0, j: 1, j_hz: 92.0 },
            Coupling { i: 1, j: 2, j_hz: 15.0 },
        ],
        damping_mu: 4.0,
    };
    let want = dense_liouvillian(&sys, &limits()).unwrap();
    // expand spin-model's per-site Liouville terms by Kronecker products
    let sup = commutation_superoperator(&hamiltonian_terms(&sys)).unwrap();
    let n = sup.n_sites();
    let dim = 4usize.pow(n as u32);
    let mut got = Array2::<C64>::zeros((dim, dim));
    for t in 0..sup.terms().len() {
        let mut acc = Array2::<C64>::eye(1);
        for site in 0..n {
            acc = ndarray::linalg::kron(&acc, &sup.local_matrix(t, site));
        }
        got = got + acc.mapv(|z| z * sup.terms()[t].coeff);
    }
    assert!(rel2(&got, &want) <= 1e-12);
}

#[test]
fn detection_state_tt_matches_the_oracle_vector() {
    let sys = SpinSystem {
        spins: vec![
            spin("N1", "15N", -2450.0),
            spin("H1", "1H", 310.0),
            spin("N2", "15N", -2610.0),
            spin("C1", "13C", 440.0),
        ],
        couplings: vec![Coupling { i: 0, j: 1, j_hz: 92.0 }],
        damping_mu: 6.0,
    };
    for isotope in ["15N", "1H", "13C"] {
        let want = dense_detection(&sys, isotope, &limits()).unwrap();
        let got = detection_state(&sys, isotope).unwrap().to_dense().unwrap();
        let err: f64 = (&got - &want).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let scale: f64 = want.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-12 * scale, "isotope {isotope}");
    }
}
