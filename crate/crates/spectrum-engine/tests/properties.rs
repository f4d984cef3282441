use amen_solver::SolverConfig;
use dense_oracle::{dense_detection, dense_spectrum, DenseLimits};
use ndarray_linalg::{EigValsh, UPLO};
use proptest::prelude::*;
use spectrum_engine::{
    assemble_shifted, build_liouvillian, detection_state, spectrum, SpectrumRequest,
};
use spin_model::{Coupling, Spin, SpinSystem};

const ISOTOPES: [&str; 4] = ["1H", "13C", "15N", "19F"];

fn arb_system(max_spins: usize) -> impl Strategy<Value = SpinSystem> {
    (2..=max_spins).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        let n_pairs = pairs.len();
        (
            prop::collection::vec((0usize..4, -120.0..120.0f64), n),
            prop::collection::vec(proptest::option::of(-15.0..15.0f64), n_pairs),
            0.8..6.0f64,
        )
            .prop_map(move |(spins, js, mu)| SpinSystem {
                spins: spins
                    .iter()
                    .enumerate()
                    .map(|(k, &(iso, off))| Spin {
                        label: format!("s{k}"),
                        isotope: ISOTOPES[iso].into(),
                        offset_hz: off,
                    })
                    .collect(),
                couplings: pairs
                    .iter()
                    .zip(&js)
                    .filter_map(|(&(i, j), &jv)| jv.map(|j_hz| Coupling { i, j, j_hz }))
                    .collect(),
                damping_mu: mu,
            })
    })
}

fn arb_grid() -> impl Strategy<Value = Vec<f64>> {
    (-500.0..500.0f64, 0.5..20.0f64)
        .prop_map(|(start, step)| (0..7).map(|k| start + step * k as f64).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_spectra_match_the_dense_oracle(sys in arb_system(4), grid in arb_grid()) {
        let eps = 1e-6;
        let isotope = sys.spins[0].isotope.clone();
        let req = SpectrumRequest::new(sys.clone(), &isotope, grid.clone(), SolverConfig::new(eps));
        let res = spectrum(&req).unwrap();
        prop_assert!(res.points.iter().all(|p| p.converged));

        let oracle =
            dense_spectrum(&sys, &grid, sys.damping_mu, &isotope, &DenseLimits::default())
                .unwrap();
        let scale = oracle.iter().fold(0.0f64, |m, o| m.max(o.abs()));
        for (p, o) in res.points.iter().zip(&oracle) {
            prop_assert!(
                (p.amplitude - o).abs() <= 1e-4 * scale,
                "amplitude {} vs oracle {} (scale {})",
                p.amplitude,
                o,
                scale
            );
            // absorption amplitudes are values of a positive quadratic form
            prop_assert!(p.amplitude >= -1e-6 * scale);
        }
    }

    #[test]
    fn random_shifted_operators_stay_above_the_damping_floor(
        sys in arb_system(3),
        omega in -700.0f64..700.0,
    ) {
        let (hcomm, hcomm_sq) = build_liouvillian(&sys, 1e-10).unwrap();
        let shifted = assemble_shifted(&hcomm, &hcomm_sq, omega, sys.damping_mu, 1e-10);
        let eigs = shifted.to_dense().unwrap().eigvalsh(UPLO::Upper).unwrap();
        let floor = sys.damping_mu * sys.damping_mu;
        prop_assert!(
            eigs[0] >= floor * (1.0 - 1e-9) - 1e-9,
            "minimum eigenvalue {} under damping floor {}",
            eigs[0],
            floor
        );
    }

    #[test]
    fn random_detection_states_match_the_oracle(sys in arb_system(5)) {
        let isotope = sys.spins[0].isotope.clone();
        let d = detection_state(&sys, &isotope).unwrap();
        prop_assert!(d.ranks().iter().all(|&r| r <= 2));
        let dd = d.to_dense().unwrap();
        let oracle = dense_detection(&sys, &isotope, &DenseLimits::default()).unwrap();
        let diff = (&dd - &oracle).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        prop_assert!(diff <= 1e-14);
    }

    #[test]
    fn warm_starts_change_effort_but_not_amplitudes(
        sys in arb_system(3),
        grid in arb_grid(),
    ) {
        let eps = 1e-8;
        let isotope = sys.spins[0].isotope.clone();
        let mut req = SpectrumRequest::new(sys, &isotope, grid, SolverConfig::new(eps));
        let warm = spectrum(&req).unwrap();
        req.warm_start = false;
        let cold = spectrum(&req).unwrap();

        let scale = warm
            .points
            .iter()
            .map(|p| p.amplitude.abs())
            .fold(1e-300f64, f64::max);
        for (w, c) in warm.points.iter().zip(&cold.points) {
            prop_assert!(w.converged && c.converged);
            prop_assert!(
                (w.amplitude - c.amplitude).abs() <= 10.0 * eps * scale,
                "warm {} vs cold {}",
                w.amplitude,
                c.amplitude
            );
        }
    }

    #[test]
    fn squared_superoperators_match_on_random_systems(sys in arb_system(3)) {
        let (hcomm, hcomm_sq) = build_liouvillian(&sys, 1e-10).unwrap();
        let dense = hcomm.to_dense().unwrap();
        let dense_sq = hcomm_sq.to_dense().unwrap();
        let expected = dense.dot(&dense);
        let num = (&dense_sq - &expected)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den = expected.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(num <= 1e-8 * den.max(1.0));
    }
}
