//! Operator assembly: the commutation superoperator, its square, the
//! per-frequency shifted normal operator, and the detection state.

use amen_summation::{amen_sum, SummationConfig};
use ndarray::prelude::*;
use ndarray::s;
use spin_model::{commutation_superoperator, hamiltonian_terms, s_plus, ModelError, SpinSystem};
use tt_core::{C64, TTOperator, TTVector, TruncationPolicy};

use crate::SpectrumError;

/// Row-major vec of a single-site operator; the convention shared by the
/// superoperator cores and the dense oracle.
fn local_vec(m: ArrayView2<C64>) -> Array1<C64> {
    Array1::from_iter(m.iter().copied())
}

/// Sum the commutation superoperator of the system Hamiltonian into TT form
/// and square it once. The square is assembled explicitly (rank at most r^2
/// before rounding); every shifted operator is then a cheap linear
/// combination of the two.
pub fn build_liouvillian(
    sys: &SpinSystem,
    op_round_tol: f64,
) -> Result<(TTOperator, TTOperator), SpectrumError> {
    assert!(
        op_round_tol > 0.0 && op_round_tol.is_finite(),
        "rounding tolerance must be positive"
    );
    let ham = hamiltonian_terms(sys);
    let comm = commutation_superoperator(&ham)?;
    let (hcomm, _) = amen_sum(&comm, &SummationConfig::new(op_round_tol))?;
    let hcomm_sq = hcomm
        .compose(&hcomm)
        .expect("an operator composes with itself")
        .round(&TruncationPolicy::new(op_round_tol))
        .0;
    Ok((hcomm, hcomm_sq))
}

/// (H + omega)^2 + mu^2 as a rounded linear combination of the cached
/// square, the superoperator, and the identity. Positive definite for any
/// real omega and mu > 0.
pub fn assemble_shifted(
    hcomm: &TTOperator,
    hcomm_sq: &TTOperator,
    omega: f64,
    mu: f64,
    op_round_tol: f64,
) -> TTOperator {
    assert!(mu > 0.0, "damping mu must be positive");
    let modes = hcomm.in_modes();
    let eye = TTOperator::identity(&modes);
    hcomm_sq
        .add(&hcomm.scale(C64::new(2.0 * omega, 0.0)))
        .expect("identical mode grids")
        .add(&eye.scale(C64::new(omega * omega + mu * mu, 0.0)))
        .expect("identical mode grids")
        .round(&TruncationPolicy::new(op_round_tol))
        .0
}

/// Vectorized total S+ over every spin of the detection isotope, built
/// directly as a rank-2 tensor (exact; no rounding involved).
pub fn detection_state(sys: &SpinSystem, isotope: &str) -> Result<TTVector, SpectrumError> {
    let n = sys.n_spins();
    let picked: Vec<bool> = sys.spins.iter().map(|s| s.isotope == isotope).collect();
    if !picked.contains(&true) {
        return Err(ModelError::NoSpinsOfIsotope {
            isotope: isotope.into(),
        }
        .into());
    }
    let sp = local_vec(s_plus().view());
    let id = local_vec(Array2::<C64>::eye(2).view());
    let zero = Array1::<C64>::zeros(4);
    let site = |k: usize| if picked[k] { &sp } else { &zero };

    if n == 1 {
        let mut core = Array3::zeros((1, 4, 1));
        core.slice_mut(s![0, .., 0]).assign(site(0));
        return Ok(TTVector::from_cores_unchecked(vec![core], None));
    }

    // two states per bond: the S+ factor already placed, or still pending
    let mut cores = Vec::with_capacity(n);
    let mut first = Array3::zeros((1, 4, 2));
    first.slice_mut(s![0, .., 0]).assign(site(0));
    first.slice_mut(s![0, .., 1]).assign(&id);
    cores.push(first);
    for k in 1..n - 1 {
        let mut core = Array3::zeros((2, 4, 2));
        core.slice_mut(s![0, .., 0]).assign(&id);
        core.slice_mut(s![1, .., 0]).assign(site(k));
        core.slice_mut(s![1, .., 1]).assign(&id);
        cores.push(core);
    }
    let mut last = Array3::zeros((2, 4, 1));
    last.slice_mut(s![0, .., 0]).assign(&id);
    last.slice_mut(s![1, .., 0]).assign(site(n - 1));
    cores.push(last);
    Ok(TTVector::from_cores_unchecked(cores, None))
}
