//! Local solves: dense Cholesky below the dimension threshold, matrix-free
//! conjugate gradients above it.

use ndarray::prelude::*;
use ndarray_linalg::SolveC;
use tt_core::C64;

use crate::env::{chain_apply, dense_local};

fn cdot(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(p, q)| p.conj() * q).sum()
}

fn norm1d(a: &Array1<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// The projected operator at one site, applied without assembling it.
pub(crate) struct LocalMap<'a> {
    pub le: &'a Array3<C64>,
    pub a: &'a Array4<C64>,
    pub re: &'a Array3<C64>,
}

impl LocalMap<'_> {
    fn dims(&self) -> (usize, usize, usize) {
        (self.le.dim().2, self.a.dim().2, self.re.dim().2)
    }

    pub(crate) fn apply_flat(&self, u: &Array1<C64>) -> Array1<C64> {
        let (kl, mi, kr) = self.dims();
        let u3 = u
            .view()
            .into_shape((kl, mi, kr))
            .expect("contiguous local vector");
        let y = chain_apply(self.le, self.a, self.re, &u3.to_owned());
        let len = y.len();
        y.into_shape(len).expect("owned product")
    }
}

/// Either face of the local operator; `Dense` owns the assembled matrix so
/// the truncation probes can reuse it.
pub(crate) enum LocalOp<'a> {
    Dense(Array2<C64>),
    Free(LocalMap<'a>),
}

impl LocalOp<'_> {
    pub(crate) fn apply(&self, u: &Array1<C64>) -> Array1<C64> {
        match self {
            LocalOp::Dense(m) => m.dot(u),
            LocalOp::Free(map) => map.apply_flat(u),
        }
    }
}

pub(crate) fn assemble(le: &Array3<C64>, a: &Array4<C64>, re: &Array3<C64>) -> Array2<C64> {
    dense_local(le, a, re)
}

/// Dense Hermitian positive definite solve; `None` signals a failed
/// factorization, i.e. a local system that is not positive definite.
pub(crate) fn solve_direct(m: &Array2<C64>, v: &Array1<C64>) -> Option<Array1<C64>> {
    m.solvec(v).ok()
}

/// Plain conjugate gradients on the matrix-free local operator. Returns
/// `None` on a breakdown (non-positive curvature), which signals an
/// indefinite local system just like a failed factorization does.
pub(crate) fn solve_cg(
    map: &LocalMap<'_>,
    v: &Array1<C64>,
    x0: Array1<C64>,
    tol_abs: f64,
    max_iter: usize,
) -> Option<Array1<C64>> {
    let mut x = x0;
    let mut r = v - &map.apply_flat(&x);
    let mut rs = cdot(&r, &r).re;
    if rs.sqrt() <= tol_abs {
        return Some(x);
    }
    let mut p = r.clone();
    for _ in 0..max_iter {
        let ap = map.apply_flat(&p);
        let pap = cdot(&p, &ap).re;
        if !(pap > 0.0) {
            return None;
        }
        let alpha = C64::new(rs / pap, 0.0);
        azpy(&mut x, alpha, &p);
        azpy(&mut r, -alpha, &ap);
        let rs_new = cdot(&r, &r).re;
        if rs_new.sqrt() <= tol_abs {
            return Some(x);
        }
        let beta = C64::new(rs_new / rs, 0.0);
        p = &r + &p.mapv(|z| z * beta);
        rs = rs_new;
    }
    // out of iterations: hand back the best iterate, the outer sweep judges
    Some(x)
}

fn azpy(y: &mut Array1<C64>, alpha: C64, x: &Array1<C64>) {
    y.zip_mut_with(x, |yi, xi| *yi += alpha * xi);
}

pub(crate) fn vec_norm(v: &Array1<C64>) -> f64 {
    norm1d(v)
}
