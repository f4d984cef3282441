mod util;

use ndarray::prelude::*;
use proptest::prelude::*;
use spin_model::{
    analytic_total_sz, commutation_superoperator, detection_state, hamiltonian_terms, s_plus,
    Coupling, Spin, SpinSystem,
};
use tt_core::C64;
use util::*;

const ISOTOPES: &[&str] = &["1H", "13C", "15N"];

fn system_strategy(max_spins: usize) -> impl Strategy<Value = SpinSystem> {
    let spin = (0usize..ISOTOPES.len(), -900.0f64..900.0).prop_map(|(iso, off)| Spin {
        label: format!("s{iso}"),
        isotope: ISOTOPES[iso].to_string(),
        offset_hz: off,
    });
    (
        prop::collection::vec(spin, 1..=max_spins),
        any::<u64>(),
        0.5f64..80.0,
    )
        .prop_map(|(spins, coupling_seed, mu)| {
            let n = spins.len();
            let mut couplings = Vec::new();
            let mut bits = coupling_seed;
            for i in 0..n {
                for j in i + 1..n {
                    if bits & 1 == 1 {
                        couplings.push(Coupling {
                            i,
                            j,
                            j_hz: 5.0 + ((bits >> 1) % 140) as f64,
                        });
                    }
                    bits >>= 2;
                }
            }
            let sys = SpinSystem {
                spins,
                couplings,
                damping_mu: mu,
            };
            sys.validate().expect("generated system is valid");
            sys
        })
}

fn hermitian_deviation(a: &Array2<C64>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            dev = dev.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    dev
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hamiltonian_is_hermitian_and_real(sys in system_strategy(5)) {
        let h = cp_dense(&hamiltonian_terms(&sys));
        let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(hermitian_deviation(&h) <= 1e-12 * scale);
        // offsets and J couplings are real and sy only enters pairwise, so
        // the matrix is real-symmetric as well
        let max_im = h.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        prop_assert!(max_im <= 1e-12 * scale);
    }

    #[test]
    fn term_count_bookkeeping_holds(sys in system_strategy(6)) {
        let ham = hamiltonian_terms(&sys);
        let homo = sys
            .couplings
            .iter()
            .filter(|c| sys.same_isotope(c.i, c.j))
            .count();
        let hetero = sys.couplings.len() - homo;
        prop_assert_eq!(ham.terms().len(), sys.n_spins() + 3 * homo + hetero);
    }

    #[test]
    fn superoperator_matches_the_dense_commutator(sys in system_strategy(3), seed in any::<u64>()) {
        let n = sys.n_spins();
        let dim = 1usize << n;
        let ham = hamiltonian_terms(&sys);
        let h = cp_dense(&ham);
        let sup = cp_dense(&commutation_superoperator(&ham).unwrap());
        let mut state = seed | 1;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let rho = Array2::from_shape_fn((dim, dim), |_| C64::new(next(), next()));
        let got = sup.dot(&liouville_vec(&rho, n));
        let want = liouville_vec(&(h.dot(&rho) - rho.dot(&h)), n);
        let scale = want.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
        let err = (&got - &want).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err / scale <= 1e-12);
    }

    #[test]
    fn total_sz_tt_matches_the_cp_expansion(n in 2usize..=8) {
        let op = analytic_total_sz(n).unwrap();
        let mut want = Array2::<C64>::zeros((1 << n, 1 << n));
        for k in 0..n {
            let mats: Vec<Array2<C64>> =
                (0..n).map(|s| if s == k { sz_mat() } else { eye(2) }).collect();
            want = want + kron_chain(&mats);
        }
        prop_assert!(rel_err_2(&op.to_dense().unwrap(), &want) <= 1e-13);
    }

    #[test]
    fn detection_state_matches_the_dense_vectorization(sys in system_strategy(5)) {
        let n = sys.n_spins();
        let isotope = sys.spins[0].isotope.clone();
        let d = detection_state(&sys, &isotope).unwrap();
        let dim = 1usize << n;
        let mut total = Array2::<C64>::zeros((dim, dim));
        for (k, s) in sys.spins.iter().enumerate() {
            if s.isotope == isotope {
                let mats: Vec<Array2<C64>> = (0..n)
                    .map(|site| if site == k { s_plus() } else { eye(2) })
                    .collect();
                total = total + kron_chain(&mats);
            }
        }
        let want = liouville_vec(&total, n);
        prop_assert!(rel_err_1(&d.to_dense().unwrap(), &want) <= 1e-13);
        prop_assert!(d.ranks().iter().all(|&r| r <= 2));
    }
}

fn sz_mat() -> Array2<C64> {
    spin_model::sz()
}
