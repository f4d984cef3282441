//! Tensor-train (TT / MPS / MPO) data structures over complex doubles:
//! gauge moves, TT-SVD rounding, linear arithmetic, dense conversion, and a
//! binary container format. Everything downstream builds on this crate.

extern crate blas_src;

mod error;
mod io;
mod linalg;
mod operator;
mod policy;
mod vector;

pub use error::TTError;
pub use operator::TTOperator;
pub use policy::{BudgetRule, RankProfile, RoundReport, TruncationPolicy};
pub use vector::TTVector;

pub type C64 = num_complex::Complex64;

/// Dense reconstruction refuses to materialize more than this many entries
/// unless an explicit cap is supplied.
pub const DEFAULT_DENSE_CAP: usize = 1 << 24;

/// Tolerance for the left/right orthonormality checks in `validate`.
pub const ORTHO_TOL: f64 = 1e-12;
