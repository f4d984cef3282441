use ndarray::prelude::*;
use tt_core::C64;

/// Hz to rad/s.
pub const TWO_PI: f64 = std::f64::consts::TAU;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// sz = diag(1/2, -1/2).
pub fn sz() -> Array2<C64> {
    array![[c(0.5, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-0.5, 0.0)]]
}

/// sx = ((0, 1/2), (1/2, 0)).
pub fn sx() -> Array2<C64> {
    array![[c(0.0, 0.0), c(0.5, 0.0)], [c(0.5, 0.0), c(0.0, 0.0)]]
}

/// sy = ((0, -i/2), (i/2, 0)).
pub fn sy() -> Array2<C64> {
    array![[c(0.0, 0.0), c(0.0, -0.5)], [c(0.0, 0.5), c(0.0, 0.0)]]
}

/// s+ = sx + i sy = ((0, 1), (0, 0)).
pub fn s_plus() -> Array2<C64> {
    array![[c(0.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]
}

/// s- = sx - i sy.
pub fn s_minus() -> Array2<C64> {
    array![[c(0.0, 0.0), c(0.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]
}

pub fn identity2() -> Array2<C64> {
    Array2::eye(2)
}

/// Row-major vectorization: vec(A)[n*i + j] = A[i, j].
pub fn vec_row_major(a: ArrayView2<C64>) -> Array1<C64> {
    Array1::from_iter(a.rows().into_iter().flat_map(|r| r.to_vec()))
}

/// Inverse of [`vec_row_major`] for an n x n matrix.
pub fn mat_from_vec(v: ArrayView1<C64>, n: usize) -> Array2<C64> {
    assert_eq!(v.len(), n * n, "vector length must be n^2");
    Array2::from_shape_fn((n, n), |(i, j)| v[n * i + j])
}
