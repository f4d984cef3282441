use ndarray::prelude::*;
use ndarray::CowArray;
use ndarray_linalg::{JobSvd, QR, SVDDC};

use crate::C64;

/// Conjugate transpose.
pub(crate) fn adjoint(a: ArrayView2<C64>) -> Array2<C64> {
    Array2::from_shape_fn((a.ncols(), a.nrows()), |(i, j)| a[[j, i]].conj())
}

/// Thin QR; for an (m, n) input returns q (m, k) and r (k, n) with k = min(m, n).
pub(crate) fn thin_qr(a: ArrayView2<C64>) -> (Array2<C64>, Array2<C64>) {
    a.qr().expect("lapack qr failed")
}

/// Thin SVD via the divide-and-conquer driver.
pub(crate) fn thin_svd(a: ArrayView2<C64>) -> (Array2<C64>, Array1<f64>, Array2<C64>) {
    let (u, s, vt) = a.svddc(JobSvd::Some).expect("lapack svd failed");
    (u.expect("svd u"), s, vt.expect("svd vt"))
}

/// (r_left * m, r_right) unfolding. Copies when the core is not in row-major
/// layout; `into_shape` on a raw view would silently reinterpret the buffer.
pub(crate) fn left_unfold(c: &Array3<C64>) -> CowArray<'_, C64, Ix2> {
    let (rl, m, rr) = c.dim();
    unfold(c, (rl * m, rr))
}

/// (r_left, m * r_right) unfolding; same layout caveat as `left_unfold`.
pub(crate) fn right_unfold(c: &Array3<C64>) -> CowArray<'_, C64, Ix2> {
    let (rl, m, rr) = c.dim();
    unfold(c, (rl, m * rr))
}

fn unfold(c: &Array3<C64>, shape: (usize, usize)) -> CowArray<'_, C64, Ix2> {
    if c.is_standard_layout() {
        CowArray::from(c.view().into_shape(shape).expect("row-major reshape"))
    } else {
        let flat: Vec<C64> = c.iter().copied().collect();
        CowArray::from(Array2::from_shape_vec(shape, flat).expect("element count"))
    }
}

pub(crate) fn frob(c: &Array3<C64>) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest deviation of a^H a from the identity.
pub(crate) fn left_ortho_deviation(c: &Array3<C64>) -> f64 {
    let a = left_unfold(c);
    let g = adjoint(a.view()).dot(&a);
    gram_deviation(&g)
}

/// Largest deviation of a a^H from the identity.
pub(crate) fn right_ortho_deviation(c: &Array3<C64>) -> f64 {
    let a = right_unfold(c);
    let g = a.dot(&adjoint(a.view()));
    gram_deviation(&g)
}

fn gram_deviation(g: &Array2<C64>) -> f64 {
    let mut dev: f64 = 0.0;
    for ((i, j), z) in g.indexed_iter() {
        let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        dev = dev.max((z - target).norm());
    }
    dev
}

/// Copy into standard (row-major) layout when needed.
pub(crate) fn standardize3(a: Array3<C64>) -> Array3<C64> {
    if a.is_standard_layout() {
        a
    } else {
        let dim = a.raw_dim();
        Array3::from_shape_vec(dim, a.iter().copied().collect()).expect("shape preserved")
    }
}
