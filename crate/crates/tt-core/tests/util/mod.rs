#![allow(dead_code)]

use ndarray::prelude::*;
use tt_core::{C64, TTOperator, TTVector};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn sz() -> Array2<C64> {
    array![[c(0.5, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-0.5, 0.0)]]
}

pub fn eye(n: usize) -> Array2<C64> {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    ndarray::linalg::kron(a, b)
}

pub fn kron_chain(mats: &[Array2<C64>]) -> Array2<C64> {
    let mut out = Array2::from_elem((1, 1), c(1.0, 0.0));
    for m in mats {
        out = kron(&out, m);
    }
    out
}

/// Entry-by-entry reconstruction through the core matrix chain; an
/// implementation of the TT definition independent of `to_dense`.
pub fn naive_vec_dense(t: &TTVector) -> Array1<C64> {
    let modes = t.mode_sizes();
    let total: usize = modes.iter().product();
    let mut out = Array1::zeros(total);
    let mut idx = vec![0usize; modes.len()];
    for lin in 0..total {
        let mut rem = lin;
        for (k, &m) in modes.iter().enumerate().rev() {
            idx[k] = rem % m;
            rem /= m;
        }
        let mut v: Array2<C64> = Array2::from_elem((1, 1), c(1.0, 0.0));
        for (k, core) in t.cores().iter().enumerate() {
            let slice = core.index_axis(Axis(1), idx[k]);
            v = v.dot(&slice);
        }
        out[lin] = v[[0, 0]];
    }
    out
}

pub fn naive_op_dense(t: &TTOperator) -> Array2<C64> {
    let out_modes = t.out_modes();
    let in_modes = t.in_modes();
    let rows: usize = out_modes.iter().product();
    let cols: usize = in_modes.iter().product();
    let n = t.n_sites();
    let mut out = Array2::zeros((rows, cols));
    let mut ridx = vec![0usize; n];
    let mut cidx = vec![0usize; n];
    for r in 0..rows {
        let mut rem = r;
        for (k, &m) in out_modes.iter().enumerate().rev() {
            ridx[k] = rem % m;
            rem /= m;
        }
        for ccol in 0..cols {
            let mut rem = ccol;
            for (k, &m) in in_modes.iter().enumerate().rev() {
                cidx[k] = rem % m;
                rem /= m;
            }
            let mut v: Array2<C64> = Array2::from_elem((1, 1), c(1.0, 0.0));
            for (k, core) in t.cores().iter().enumerate() {
                let slice = core
                    .index_axis(Axis(1), ridx[k])
                    .index_axis(Axis(1), cidx[k])
                    .to_owned();
                v = v.dot(&slice);
            }
            out[[r, ccol]] = v[[0, 0]];
        }
    }
    out
}

pub fn rel_err_1(a: &Array1<C64>, reference: &Array1<C64>) -> f64 {
    let num: f64 = (a - reference).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = reference.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

pub fn rel_err_2(a: &Array2<C64>, reference: &Array2<C64>) -> f64 {
    let num: f64 = (a - reference).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = reference.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Analytic two-band TT cores for a sum of one identical local term per site.
pub fn banded_sum_operator(local: &Array2<C64>, n: usize) -> TTOperator {
    let m = local.nrows();
    let id = eye(m);
    let zero = Array2::<C64>::zeros((m, m));
    assert!(n >= 2);
    let mut cores = Vec::with_capacity(n);
    let mut first = ndarray::Array4::zeros((1, m, m, 2));
    first.slice_mut(ndarray::s![0, .., .., 0]).assign(local);
    first.slice_mut(ndarray::s![0, .., .., 1]).assign(&id);
    cores.push(first);
    for _ in 1..n - 1 {
        let mut mid = ndarray::Array4::zeros((2, m, m, 2));
        mid.slice_mut(ndarray::s![0, .., .., 0]).assign(&id);
        mid.slice_mut(ndarray::s![0, .., .., 1]).assign(&zero);
        mid.slice_mut(ndarray::s![1, .., .., 0]).assign(local);
        mid.slice_mut(ndarray::s![1, .., .., 1]).assign(&id);
        cores.push(mid);
    }
    let mut last = ndarray::Array4::zeros((2, m, m, 1));
    last.slice_mut(ndarray::s![0, .., .., 0]).assign(&id);
    last.slice_mut(ndarray::s![1, .., .., 0]).assign(local);
    cores.push(last);
    TTOperator::new(cores).expect("banded construction is valid")
}
