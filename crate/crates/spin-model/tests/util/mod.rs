#![allow(dead_code)]

use ndarray::linalg::kron;
use ndarray::prelude::*;
use spin_model::{CPOperatorSum, Space};
use tt_core::C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> Array2<C64> {
    Array2::eye(n)
}

pub fn kron_chain(mats: &[Array2<C64>]) -> Array2<C64> {
    let mut acc = Array2::eye(1);
    for m in mats {
        acc = kron(&acc, m);
    }
    acc
}

/// Expand a CP sum densely straight from the term data (identity fill), kept
/// independent of the library's own helpers.
pub fn cp_dense(sum: &CPOperatorSum) -> Array2<C64> {
    let n = sum.n_sites();
    let m: usize = match sum.space() {
        Space::Hilbert => 2,
        Space::Liouville => 4,
    };
    let dim = m.pow(n as u32);
    let mut acc = Array2::<C64>::zeros((dim, dim));
    for term in sum.terms() {
        let mats: Vec<Array2<C64>> = (0..n)
            .map(|site| match term.factors.get(&site) {
                Some(local) => local.matrix().clone(),
                None => eye(m),
            })
            .collect();
        acc = acc + kron_chain(&mats).mapv(|z| z * term.coeff);
    }
    acc
}

/// Row-major, site-ordered vectorization of a 2^n x 2^n matrix: the index
/// packs one (row bit, col bit) quadruple per site, site 0 slowest.
pub fn liouville_vec(a: &Array2<C64>, n: usize) -> Array1<C64> {
    let dim = 1usize << n;
    assert_eq!(a.nrows(), dim);
    assert_eq!(a.ncols(), dim);
    let mut v = Array1::zeros(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut idx = 0usize;
            for site in 0..n {
                let ib = (i >> (n - 1 - site)) & 1;
                let jb = (j >> (n - 1 - site)) & 1;
                idx = idx * 4 + 2 * ib + jb;
            }
            v[idx] = a[[i, j]];
        }
    }
    v
}

/// Inverse of [`liouville_vec`].
pub fn liouville_unvec(v: &Array1<C64>, n: usize) -> Array2<C64> {
    let dim = 1usize << n;
    assert_eq!(v.len(), dim * dim);
    let mut a = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            let mut idx = 0usize;
            for site in 0..n {
                let ib = (i >> (n - 1 - site)) & 1;
                let jb = (j >> (n - 1 - site)) & 1;
                idx = idx * 4 + 2 * ib + jb;
            }
            a[[i, j]] = v[idx];
        }
    }
    a
}

pub fn rel_err_2(got: &Array2<C64>, want: &Array2<C64>) -> f64 {
    let num: f64 = (got - want).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = want.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

pub fn rel_err_1(got: &Array1<C64>, want: &Array1<C64>) -> f64 {
    let num: f64 = (got - want).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = want.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}
