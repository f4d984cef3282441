use amen_solver::{amen_solve, dmrg_solve_one_site, LocalSolver, SolverConfig, SolverError};
use dense_oracle::{dense_detection, dense_liouvillian, shifted_normal_matrix, DenseLimits};
use ndarray::prelude::*;
use ndarray_linalg::Solve;
use spin_model::{Spin, SpinSystem};
use tt_core::{C64, TTOperator, TTVector, TruncationPolicy};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn norm1(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn rel_err(x: &TTVector, reference: &Array1<C64>) -> f64 {
    let xd = x.to_dense().expect("small dense expansion");
    norm1(&(&xd - reference)) / norm1(reference)
}

fn adjoint_op(op: &TTOperator) -> TTOperator {
    let cores = op
        .cores()
        .iter()
        .map(|core| {
            core.mapv(|z| z.conj())
                .permuted_axes([0, 2, 1, 3])
                .as_standard_layout()
                .to_owned()
        })
        .collect();
    TTOperator::from_cores_unchecked(cores, None)
}

/// C^H C + 1 for a unit-norm random C: Hermitian with spectrum in [1, 2].
fn hpd_operator(modes: &[usize], rank: usize, seed: u64) -> TTOperator {
    let cop = TTOperator::random(modes, rank, seed);
    let cop = cop.scale(c(1.0 / cop.norm(), 0.0));
    adjoint_op(&cop)
        .compose(&cop)
        .unwrap()
        .add(&TTOperator::identity(modes))
        .unwrap()
}

#[test]
fn identity_system_returns_the_rhs_after_one_sweep() {
    let modes = [2usize, 2, 2, 2];
    let a = TTOperator::identity(&modes);
    let b = TTVector::random(&modes, 3, 11);
    let (x, report) = amen_solve(&a, &b, &SolverConfig::new(1e-8)).unwrap();
    assert!(report.converged);
    assert_eq!(report.sweeps_used, 1);
    let bd = b.to_dense().unwrap();
    assert!(rel_err(&x, &bd) <= 1e-14);
}

#[test]
fn single_spin_shifted_system_matches_the_dense_solve() {
    let sys = SpinSystem {
        spins: vec![Spin {
            label: "n".into(),
            isotope: "15N".into(),
            offset_hz: 75.0,
        }],
        couplings: Vec::new(),
        damping_mu: 3.0,
    };
    let limits = DenseLimits::default();
    let l = dense_liouvillian(&sys, &limits).unwrap();
    let omega = 2.0 * std::f64::consts::PI * 75.0 * 0.75;
    let shifted = shifted_normal_matrix(&l, omega, sys.damping_mu);
    let tight = TruncationPolicy::new(1e-13);
    let (a, _) = TTOperator::from_dense(shifted.view(), &[4], &[4], &tight).unwrap();
    let rhs = dense_detection(&sys, "15N", &limits).unwrap();
    let (b, _) = TTVector::from_dense(rhs.view(), &[4], &tight).unwrap();

    let (x, report) = amen_solve(&a, &b, &SolverConfig::new(1e-10)).unwrap();
    assert!(report.converged);
    let x_ref = shifted.solve(&rhs).unwrap();
    assert!(rel_err(&x, &x_ref) <= 1e-10);
}

#[test]
fn random_spd_system_matches_the_dense_solve() {
    let modes = [2usize; 5];
    let cop = TTOperator::random(&modes, 3, 21);
    let a = adjoint_op(&cop)
        .compose(&cop)
        .unwrap()
        .add(&TTOperator::identity(&modes))
        .unwrap();
    let b = TTVector::random(&modes, 3, 22);

    let (x, report) = amen_solve(&a, &b, &SolverConfig::new(1e-8)).unwrap();
    assert!(report.converged);
    assert!(report.final_residual() <= 1e-8);

    let ad = a.to_dense().unwrap();
    let bd = b.to_dense().unwrap();
    let x_ref = ad.solve(&bd).unwrap();
    assert!(rel_err(&x, &x_ref) <= 1e-7);
}

#[test]
fn iterative_and_direct_local_solves_agree() {
    let modes = [2usize; 4];
    let a = hpd_operator(&modes, 3, 31);
    let b = TTVector::random(&modes, 2, 32);

    let (xd, rd) = amen_solve(
        &a,
        &b,
        &SolverConfig::new(1e-9).with_local_solver(LocalSolver::Direct),
    )
    .unwrap();
    let (xi, ri) = amen_solve(
        &a,
        &b,
        &SolverConfig::new(1e-9).with_local_solver(LocalSolver::Iterative),
    )
    .unwrap();
    assert!(rd.converged && ri.converged);
    let dd = xd.to_dense().unwrap();
    let di = xi.to_dense().unwrap();
    assert!(norm1(&(&dd - &di)) / norm1(&dd) <= 1e-7);
}

#[test]
fn a_guess_with_the_right_ranks_lets_the_baseline_converge() {
    let modes = [2usize; 5];
    let a = hpd_operator(&modes, 2, 41);
    let b = TTVector::random(&modes, 3, 42);
    let (x_star, _) = amen_solve(&a, &b, &SolverConfig::new(1e-10)).unwrap();

    let mut cfg = SolverConfig::new(1e-8);
    cfg.initial_guess = Some(x_star);
    let (_, report) = dmrg_solve_one_site(&a, &b, &cfg).unwrap();
    assert!(report.converged);
    assert_eq!(report.sweeps_used, 1);
}

#[test]
fn a_rank_one_guess_stalls_the_baseline_but_not_amen() {
    let modes = [2usize; 5];
    let a = hpd_operator(&modes, 3, 51);
    let b = TTVector::random(&modes, 3, 52);
    let (guess, _) = b.round(&TruncationPolicy::new(1e-14).with_max_rank(1));

    let mut cfg = SolverConfig::new(1e-9).with_max_sweeps(8);
    cfg.initial_guess = Some(guess);
    let (_, stalled) = dmrg_solve_one_site(&a, &b, &cfg).unwrap();
    let (_, adaptive) = amen_solve(&a, &b, &cfg).unwrap();

    assert!(adaptive.converged);
    assert!(!stalled.converged);
    assert!(stalled.final_residual() > 100.0 * adaptive.final_residual());
    // frozen ranks are the whole story: every sweep reports the guess profile
    for profile in &stalled.rank_history {
        assert!(profile.ranks.iter().all(|&r| r == 1));
    }
}

#[test]
fn identity_baseline_projects_onto_the_frozen_rank_manifold() {
    let modes = [2usize; 5];
    let a = TTOperator::identity(&modes);
    let b = TTVector::random(&modes, 4, 55);
    let cap = TruncationPolicy::new(1e-14).with_max_rank(2);
    let (guess, _) = b.round(&cap);
    let bd = b.to_dense().unwrap();
    // independent construction of the same quasi-best rank-2 approximation
    let (tsvd, _) = TTVector::from_dense(bd.view(), &modes, &cap).unwrap();

    let mut cfg = SolverConfig::new(1e-12).with_max_sweeps(6);
    cfg.initial_guess = Some(guess.clone());
    let (x, report) = dmrg_solve_one_site(&a, &b, &cfg).unwrap();

    assert_eq!(x.ranks(), guess.ranks());
    for profile in &report.rank_history {
        assert_eq!(profile.ranks, guess.ranks());
    }
    let err_x = rel_err(&x, &bd);
    let err_guess = rel_err(&guess, &bd);
    let err_tsvd = rel_err(&tsvd, &bd);
    assert!(err_x <= err_guess * (1.0 + 1e-10) + 1e-14);
    assert!(err_x <= err_tsvd * (1.0 + 1e-6) + 1e-12);
}

#[test]
fn energy_decreases_across_every_site_update() {
    let modes = [2usize; 4];
    let a = hpd_operator(&modes, 3, 71);
    let b = TTVector::random(&modes, 3, 72);
    let ad = a.to_dense().unwrap();
    let bd = b.to_dense().unwrap();
    let energy = |x: &TTVector| {
        let xd = x.to_dense().unwrap();
        let ax = ad.dot(&xd);
        let xax: C64 = xd.iter().zip(ax.iter()).map(|(xi, yi)| xi.conj() * yi).sum();
        let xb: C64 = xd.iter().zip(bd.iter()).map(|(xi, bi)| xi.conj() * bi).sum();
        xax.re - 2.0 * xb.re
    };

    for adaptive in [true, false] {
        let mut cfg = SolverConfig::new(1e-10).with_max_sweeps(4);
        cfg.record_site_iterates = true;
        let report = if adaptive {
            amen_solve(&a, &b, &cfg).unwrap().1
        } else {
            dmrg_solve_one_site(&a, &b, &cfg).unwrap().1
        };
        let js: Vec<f64> = report.site_iterates.iter().map(&energy).collect();
        assert!(js.len() > 4);
        let slack = 1e-10 * (1.0 + js[0].abs());
        for w in js.windows(2) {
            assert!(
                w[1] <= w[0] + slack,
                "energy rose from {} to {} (adaptive: {adaptive})",
                w[0],
                w[1]
            );
        }
    }
}

#[test]
fn shape_errors_are_reported_precisely() {
    let cfg = SolverConfig::new(1e-8);
    let a = TTOperator::identity(&[2, 2]);

    let b3 = TTVector::random(&[2, 2, 2], 1, 1);
    assert!(matches!(
        amen_solve(&a, &b3, &cfg).err().unwrap(),
        SolverError::Tensor(_)
    ));

    let b_wide = TTVector::random(&[2, 4], 1, 1);
    assert!(matches!(
        amen_solve(&a, &b_wide, &cfg).err().unwrap(),
        SolverError::ModeMismatch {
            site: 1,
            op: 2,
            vec: 4
        }
    ));

    let rect = Array2::<C64>::zeros((2, 4));
    let (rect_op, _) =
        TTOperator::from_dense(rect.view(), &[2], &[4], &TruncationPolicy::new(1e-12)).unwrap();
    let b1 = TTVector::random(&[4], 1, 1);
    assert!(matches!(
        amen_solve(&rect_op, &b1, &cfg).err().unwrap(),
        SolverError::NotSquare {
            site: 0,
            out: 2,
            r#in: 4
        }
    ));

    let b = TTVector::random(&[2, 2], 1, 1);
    let mut short = cfg.clone();
    short.initial_guess = Some(TTVector::random(&[2], 1, 1));
    assert!(matches!(
        amen_solve(&a, &b, &short).err().unwrap(),
        SolverError::GuessSites {
            expected: 2,
            found: 1
        }
    ));

    let mut wide = cfg;
    wide.initial_guess = Some(TTVector::random(&[2, 4], 1, 1));
    assert!(matches!(
        amen_solve(&a, &b, &wide).err().unwrap(),
        SolverError::GuessModes {
            site: 1,
            expected: 2,
            found: 4
        }
    ));
}

#[test]
fn non_convergence_is_flagged() {
    let modes = [2usize; 5];
    let a = hpd_operator(&modes, 3, 81);
    let b = TTVector::random(&modes, 3, 82);
    let (guess, _) = b.round(&TruncationPolicy::new(1e-14).with_max_rank(1));

    let mut cfg = SolverConfig::new(1e-12).with_max_sweeps(2);
    cfg.initial_guess = Some(guess);
    let (_, report) = dmrg_solve_one_site(&a, &b, &cfg).unwrap();
    assert!(!report.converged);
    assert_eq!(report.sweeps_used, 2);
    assert_eq!(report.residual_history.len(), 2);
    assert!(report.final_residual() > 1e-12);
}

#[test]
fn an_indefinite_system_reports_the_offending_site() {
    let modes = [2usize; 3];
    let a = TTOperator::identity(&modes).scale(c(-1.0, 0.0));
    let b = TTVector::random(&modes, 2, 91);

    for solver in [LocalSolver::Direct, LocalSolver::Iterative] {
        let cfg = SolverConfig::new(1e-8).with_local_solver(solver);
        let err = amen_solve(&a, &b, &cfg).err().expect("must fail");
        assert!(matches!(err, SolverError::LocalSolve { site: 0 }), "{err}");
        let err = dmrg_solve_one_site(&a, &b, &cfg).err().expect("must fail");
        assert!(matches!(err, SolverError::LocalSolve { site: 0 }), "{err}");
    }
}

#[test]
fn a_zero_right_hand_side_returns_zero_immediately() {
    let modes = [2usize; 3];
    let a = hpd_operator(&modes, 2, 95);
    let b = TTVector::zeros(&modes);
    let (x, report) = amen_solve(&a, &b, &SolverConfig::new(1e-8)).unwrap();
    assert!(report.converged);
    assert_eq!(report.sweeps_used, 0);
    assert_eq!(x.to_dense().unwrap(), Array1::<C64>::zeros(8));
}

#[test]
fn repeated_runs_are_bit_identical() {
    let modes = [2usize; 4];
    let a = hpd_operator(&modes, 3, 101);
    let b = TTVector::random(&modes, 3, 102);
    let cfg = SolverConfig::new(1e-9);

    let (x1, r1) = amen_solve(&a, &b, &cfg).unwrap();
    let (x2, r2) = amen_solve(&a, &b, &cfg).unwrap();
    assert_eq!(r1.residual_history, r2.residual_history);
    assert_eq!(r1.rank_history, r2.rank_history);
    assert_eq!(x1.to_dense().unwrap(), x2.to_dense().unwrap());
}
