//! Spin-system data model for liquid-state NMR: isotropic chemical-shift
//! offsets plus scalar J couplings on spin-1/2 nuclei. Produces Hamiltonians
//! as sums of Kronecker (CP) terms, their Liouville-space commutation
//! superoperators, analytic banded TT constructions for total-spin sums, and
//! the S+ detection state.
//!
//! Conventions (single source of truth; the dense oracle imports these):
//! spin operators carry the 1/2 factor (sz = diag(1/2, -1/2)), offsets and
//! couplings are given in Hz and scaled by 2 pi internally, density matrices
//! are vectorized row by row per site, and the global Liouville basis is
//! site-ordered (the site-0 quadruple varies slowest).

mod analytic;
mod constants;
mod cp;
mod error;
mod system;

pub use analytic::{analytic_total_sz, analytic_zz_chain, detection_state};
pub use constants::{
    identity2, mat_from_vec, s_minus, s_plus, sx, sy, sz, vec_row_major, TWO_PI,
};
pub use cp::{
    commutation_superoperator, hamiltonian_terms, CPOperatorSum, CPTerm, LocalKind,
    LocalOperator, Space,
};
pub use error::ModelError;
pub use system::{Coupling, Spin, SpinSystem, SPIN_HALF_ISOTOPES};
