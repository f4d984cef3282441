//! Alternating one-site solvers for A x = b with all operands in tensor
//! train format and A Hermitian positive definite.
//!
//! [`amen_solve`] keeps a low-rank sketch of the residual alongside the
//! iterate and widens the frame with it after every local solve, so the
//! solution ranks adapt on their own. [`dmrg_solve_one_site`] is the plain
//! one-site baseline: the same local solves, but the ranks stay frozen at
//! whatever the initial guess brought, which is exactly what makes it stall
//! when that guess is too poor.
//!
//! Positive definiteness is a caller contract. It is not checked globally
//! (that would cost as much as the solve); a local factorization or CG
//! breakdown surfaces it as [`SolverError::LocalSolve`] with the site.

use serde::Serialize;
use thiserror::Error;
use tt_core::{RankProfile, TTError, TTVector};

mod env;
mod local;
mod sweep;

pub use sweep::{amen_solve, dmrg_solve_one_site};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("operator is not square at site {site}: {out} out vs {r#in} in")]
    NotSquare { site: usize, out: usize, r#in: usize },
    #[error("operator/right-hand-side mode mismatch at site {site}: {op} vs {vec}")]
    ModeMismatch { site: usize, op: usize, vec: usize },
    #[error("initial guess has {found} sites, expected {expected}")]
    GuessSites { expected: usize, found: usize },
    #[error("initial guess mode at site {site} is {found}, expected {expected}")]
    GuessModes {
        site: usize,
        expected: usize,
        found: usize,
    },
    #[error("local system at site {site} is not positive definite (or numerically singular)")]
    LocalSolve { site: usize },
    #[error(transparent)]
    Tensor(#[from] TTError),
}

/// How the projected site systems are solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LocalSolver {
    /// Assemble the local matrix and factorize it (Cholesky).
    Direct,
    /// Matrix-free conjugate gradients at tolerance ε/10, warm-started from
    /// the current core.
    Iterative,
    /// Direct up to `direct_threshold` unknowns, iterative above.
    Auto,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Target relative residual |b - Ax| / |b|.
    pub rel_tolerance: f64,
    /// Rank of the residual sketch used for enrichment (AMEn only).
    pub enrichment_rank: usize,
    pub max_sweeps: usize,
    pub local_solver: LocalSolver,
    /// Largest local dimension r_(n-1)*m_n*r_n still solved directly when
    /// `local_solver` is `Auto`.
    pub direct_threshold: usize,
    /// Starting iterate; defaults to the right-hand side.
    pub initial_guess: Option<TTVector>,
    /// Seed for the random residual-sketch start.
    pub seed: u64,
    /// Keep a snapshot of the iterate after every site update; used by the
    /// energy-monotonicity checks on small systems. Off by default.
    pub record_site_iterates: bool,
}

impl SolverConfig {
    pub fn new(rel_tolerance: f64) -> Self {
        assert!(
            rel_tolerance > 0.0 && rel_tolerance.is_finite(),
            "relative tolerance must be positive and finite"
        );
        Self {
            rel_tolerance,
            enrichment_rank: 3,
            max_sweeps: 50,
            local_solver: LocalSolver::Auto,
            direct_threshold: 2500,
            initial_guess: None,
            seed: 0xDEC0_DE42,
            record_site_iterates: false,
        }
    }

    pub fn with_enrichment_rank(mut self, rank: usize) -> Self {
        assert!(rank >= 1, "enrichment rank must be at least one");
        self.enrichment_rank = rank;
        self
    }

    pub fn with_max_sweeps(mut self, sweeps: usize) -> Self {
        assert!(sweeps >= 1, "need at least one sweep");
        self.max_sweeps = sweeps;
        self
    }

    pub fn with_local_solver(mut self, solver: LocalSolver) -> Self {
        self.local_solver = solver;
        self
    }

    pub fn with_direct_threshold(mut self, threshold: usize) -> Self {
        assert!(threshold >= 1, "direct threshold must be at least one");
        self.direct_threshold = threshold;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveTimings {
    pub setup_ms: f64,
    pub sweep_ms: Vec<f64>,
    pub total_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub sweeps_used: usize,
    pub converged: bool,
    /// True relative residual |b - Ax| / |b| measured in TT arithmetic after
    /// each full sweep.
    pub residual_history: Vec<f64>,
    pub rank_history: Vec<RankProfile>,
    pub timings: SolveTimings,
    /// Iterate snapshots after each site update when
    /// [`SolverConfig::record_site_iterates`] is set; empty otherwise.
    #[serde(skip)]
    pub site_iterates: Vec<TTVector>,
}

impl SolveReport {
    /// Residual after the last sweep (1.0 before any sweep ran).
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(1.0)
    }
}
