//! Brute-force dense reference for small spin systems. Everything here is
//! deliberately naive: full Kronecker expansions, global-basis superoperators
//! permuted into the site-ordered convention, and direct factorizations per
//! frequency point. The TT machinery is tested against these results, so this
//! crate must stay independent of it (it uses tt-core only for the scalar
//! type). Spin conventions are imported from spin-model rather than repeated,
//! so a convention change breaks loudly instead of cancelling silently.

use ndarray::linalg::kron;
use ndarray::prelude::*;
use ndarray_linalg::Solve;
use spin_model::{hamiltonian_terms, ModelError, SpinSystem};
use thiserror::Error;
use tt_core::C64;

/// Hard size caps for the oracle entry points.
#[derive(Clone, Copy, Debug)]
pub struct DenseLimits {
    pub max_hilbert_spins: usize,
    pub max_liouville_spins: usize,
}

impl Default for DenseLimits {
    fn default() -> Self {
        Self {
            max_hilbert_spins: 12,
            max_liouville_spins: 7,
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{n} spins exceed the dense Hilbert-space cap of {cap}")]
    HilbertCap { n: usize, cap: usize },

    #[error("{n} spins exceed the dense Liouville-space cap of {cap}")]
    LiouvilleCap { n: usize, cap: usize },

    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Exact 2^N x 2^N Hamiltonian: every CP term expanded by Kronecker products.
pub fn dense_hamiltonian(
    sys: &SpinSystem,
    limits: &DenseLimits,
) -> Result<Array2<C64>, OracleError> {
    let n = sys.n_spins();
    if n > limits.max_hilbert_spins {
        return Err(OracleError::HilbertCap {
            n,
            cap: limits.max_hilbert_spins,
        });
    }
    let ham = hamiltonian_terms(sys);
    let dim = 1usize << n;
    let mut h = Array2::<C64>::zeros((dim, dim));
    for term in ham.terms() {
        let mut acc = Array2::<C64>::eye(1);
        for site in 0..n {
            let local = match term.factors.get(&site) {
                Some(l) => l.matrix().clone(),
                None => Array2::eye(2),
            };
            acc = kron(&acc, &local);
        }
        h = h + acc.mapv(|z| z * term.coeff);
    }
    Ok(h)
}

/// Index of the site-ordered Liouville basis state holding global row i and
/// column j: one (row bit, col bit) quadruple per site, site 0 slowest.
fn site_index(i: usize, j: usize, n: usize) -> usize {
    let mut idx = 0usize;
    for site in 0..n {
        let ib = (i >> (n - 1 - site)) & 1;
        let jb = (j >> (n - 1 - site)) & 1;
        idx = idx * 4 + 2 * ib + jb;
    }
    idx
}

/// Site-ordered, per-site row-major vectorization of a 2^N x 2^N matrix.
pub fn site_ordered_vec(a: ArrayView2<C64>) -> Array1<C64> {
    let dim = a.nrows();
    assert_eq!(a.ncols(), dim, "square matrix required");
    let n = dim.trailing_zeros() as usize;
    assert_eq!(1usize << n, dim, "dimension must be a power of two");
    let mut v = Array1::zeros(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            v[site_index(i, j, n)] = a[[i, j]];
        }
    }
    v
}

/// Inverse of [`site_ordered_vec`].
pub fn site_ordered_unvec(v: ArrayView1<C64>) -> Array2<C64> {
    let entries = v.len();
    let dim = (entries as f64).sqrt().round() as usize;
    assert_eq!(dim * dim, entries, "length must be a perfect square");
    let n = dim.trailing_zeros() as usize;
    assert_eq!(1usize << n, dim, "dimension must be a power of two");
    let mut a = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            a[[i, j]] = v[site_index(i, j, n)];
        }
    }
    a
}

/// Commutation superoperator H x 1 - 1 x H^T, built in the global row-major
/// vec basis and then permuted into the site-ordered basis. The construction
/// route is deliberately different from spin-model's per-site one.
pub fn dense_liouvillian(
    sys: &SpinSystem,
    limits: &DenseLimits,
) -> Result<Array2<C64>, OracleError> {
    let n = sys.n_spins();
    if n > limits.max_liouville_spins {
        return Err(OracleError::LiouvilleCap {
            n,
            cap: limits.max_liouville_spins,
        });
    }
    // the Liouville cap already bounds n, so the Hilbert build cannot trip
    let h = dense_hamiltonian(
        sys,
        &DenseLimits {
            max_hilbert_spins: n,
            ..*limits
        },
    )?;
    let dim = h.nrows();
    let eye = Array2::<C64>::eye(dim);
    let mut global = kron(&h, &eye);
    global = global - kron(&eye, &h.t().to_owned());
    // permutation between global index i*dim + j and the site-ordered index
    let mut perm = vec![0usize; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            perm[site_index(i, j, n)] = i * dim + j;
        }
    }
    Ok(Array2::from_shape_fn((dim * dim, dim * dim), |(a, b)| {
        global[[perm[a], perm[b]]]
    }))
}

/// Vectorized total S+ over all spins of the isotope, in the site-ordered
/// basis; serves as both initial and detection state.
pub fn dense_detection(
    sys: &SpinSystem,
    isotope: &str,
    limits: &DenseLimits,
) -> Result<Array1<C64>, OracleError> {
    let n = sys.n_spins();
    if n > limits.max_liouville_spins {
        return Err(OracleError::LiouvilleCap {
            n,
            cap: limits.max_liouville_spins,
        });
    }
    if !sys.spins.iter().any(|s| s.isotope == isotope) {
        return Err(OracleError::Model(ModelError::NoSpinsOfIsotope {
            isotope: isotope.to_string(),
        }));
    }
    let dim = 1usize << n;
    let mut total = Array2::<C64>::zeros((dim, dim));
    for (k, s) in sys.spins.iter().enumerate() {
        if s.isotope != isotope {
            continue;
        }
        let mut acc = Array2::<C64>::eye(1);
        for site in 0..n {
            let local = if site == k {
                spin_model::s_plus()
            } else {
                Array2::eye(2)
            };
            acc = kron(&acc, &local);
        }
        total = total + acc;
    }
    Ok(site_ordered_vec(total.view()))
}

/// The shifted normal operator (L + omega)^2 + mu^2 of the spectral linear
/// system; Hermitian positive definite for mu > 0.
pub fn shifted_normal_matrix(l: &Array2<C64>, omega: f64, mu: f64) -> Array2<C64> {
    let dim = l.nrows();
    let mut shifted = l.clone();
    for k in 0..dim {
        shifted[[k, k]] += C64::new(omega, 0.0);
    }
    let mut a = shifted.dot(&shifted);
    for k in 0..dim {
        a[[k, k]] += C64::new(mu * mu, 0.0);
    }
    a
}

/// Absorption amplitudes Re <d, Im rho(omega)> with Im rho = mu * A^{-1} d,
/// one direct LU solve per grid point. L^2 is hoisted out of the loop, so each
/// point assembles L^2 + 2 omega L + (omega^2 + mu^2) instead of squaring the
/// shifted operator from scratch.
pub fn dense_spectrum(
    sys: &SpinSystem,
    grid: &[f64],
    mu: f64,
    isotope: &str,
    limits: &DenseLimits,
) -> Result<Vec<f64>, OracleError> {
    let l = dense_liouvillian(sys, limits)?;
    let lsq = l.dot(&l);
    let d = dense_detection(sys, isotope, limits)?;
    let dim = l.nrows();
    let mut out = Vec::with_capacity(grid.len());
    for &omega in grid {
        let mut a = &lsq + &l.mapv(|z| z * 2.0 * omega);
        for k in 0..dim {
            a[[k, k]] += C64::new(omega * omega + mu * mu, 0.0);
        }
        let x = a.solve(&d).expect("dense solve (SPD by construction)");
        let ip: C64 = d.iter().zip(x.iter()).map(|(p, q)| p.conj() * q).sum();
        out.push(mu * ip.re);
    }
    Ok(out)
}

/// The same amplitudes through the resolvent form Re(-i <d, (L + omega -
/// i mu)^{-1} d>); equality with [`dense_spectrum`] validates the reduction
/// to the normal equations.
pub fn dense_spectrum_resolvent(
    sys: &SpinSystem,
    grid: &[f64],
    mu: f64,
    isotope: &str,
    limits: &DenseLimits,
) -> Result<Vec<f64>, OracleError> {
    let l = dense_liouvillian(sys, limits)?;
    let d = dense_detection(sys, isotope, limits)?;
    let dim = l.nrows();
    let mut out = Vec::with_capacity(grid.len());
    for &omega in grid {
        let mut a = l.clone();
        for k in 0..dim {
            a[[k, k]] += C64::new(omega, -mu);
        }
        let x = a.solve(&d).expect("dense resolvent solve");
        let ip: C64 = d.iter().zip(x.iter()).map(|(p, q)| p.conj() * q).sum();
        out.push((C64::new(0.0, -1.0) * ip).re);
    }
    Ok(out)
}
