use ndarray::linalg::kron;
use ndarray::prelude::*;
use spin_model::CPOperatorSum;
use tt_core::C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn kron_chain(locals: &[Array2<C64>]) -> Array2<C64> {
    let mut acc = Array2::<C64>::eye(1);
    for l in locals {
        acc = kron(&acc, l);
    }
    acc
}

/// Independent dense expansion of a CP sum, term by term.
pub fn cp_dense(sum: &CPOperatorSum) -> Array2<C64> {
    let n = sum.n_sites();
    let m = sum.mode_size();
    let dim = m.pow(n as u32);
    let mut acc = Array2::<C64>::zeros((dim, dim));
    for (j, term) in sum.terms().iter().enumerate() {
        let locals: Vec<_> = (0..n).map(|site| sum.local_matrix(j, site)).collect();
        acc = acc + kron_chain(&locals).mapv(|z| z * term.coeff);
    }
    acc
}

pub fn frob2(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn rel2(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    frob2(&(a - b)) / frob2(b)
}
