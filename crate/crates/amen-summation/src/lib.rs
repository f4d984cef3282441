//! Compression of many-term CP operator sums into a single tensor train.
//!
//! Two routes are provided. [`amen_sum`] runs alternating one-site sweeps
//! that project the sum onto the current tensor frames, truncate, and then
//! widen the frame with a low-rank sketch of the residual, so the iterate
//! never has to hold all terms at once and the cost per sweep stays linear
//! in the number of terms. [`binary_sum`] is the classical baseline: pairwise
//! add-and-round over a balanced tree, whose intermediate ranks can grow far
//! beyond the final ones.
//!
//! Both take a validated [`spin_model::CPOperatorSum`] and return the
//! compressed [`tt_core::TTOperator`] together with a [`SummationReport`].

use serde::Serialize;
use thiserror::Error;
use tt_core::{RankProfile, TTError, TTOperator};

mod amen;
mod binary;
mod terms;

pub use amen::amen_sum;
pub use binary::binary_sum;

#[derive(Debug, Error)]
pub enum SummationError {
    #[error("operator sum has no terms")]
    EmptySum,
    #[error("initial guess has {found} sites, the sum has {expected}")]
    GuessSites { expected: usize, found: usize },
    #[error("initial guess mode at site {site} is {found}x{found_in}, expected {expected}x{expected}")]
    GuessModes {
        site: usize,
        expected: usize,
        found: usize,
        found_in: usize,
    },
    #[error(transparent)]
    Tensor(#[from] TTError),
}

/// Knobs for [`amen_sum`]. `rel_tolerance` controls both the per-bond
/// truncation budget and the stopping test on the relative change of the
/// iterate between sweeps.
#[derive(Clone, Debug)]
pub struct SummationConfig {
    pub rel_tolerance: f64,
    /// Bond rank of the residual sketch that widens the frame each step.
    pub enrichment_rank: usize,
    pub max_sweeps: usize,
    /// Starting iterate; the first term of the sum when absent.
    pub initial_guess: Option<TTOperator>,
    /// Seed for the random initial residual sketch.
    pub seed: u64,
}

impl SummationConfig {
    pub fn new(rel_tolerance: f64) -> Self {
        assert!(
            rel_tolerance > 0.0 && rel_tolerance.is_finite(),
            "relative tolerance must be positive and finite"
        );
        Self {
            rel_tolerance,
            enrichment_rank: 4,
            max_sweeps: 20,
            initial_guess: None,
            seed: 0x00C0_FFEE,
        }
    }

    pub fn with_enrichment_rank(mut self, rank: usize) -> Self {
        assert!(rank >= 1, "enrichment rank must be at least 1");
        self.enrichment_rank = rank;
        self
    }

    pub fn with_max_sweeps(mut self, sweeps: usize) -> Self {
        assert!(sweeps >= 1, "need at least one sweep");
        self.max_sweeps = sweeps;
        self
    }
}

/// What a summation run did, for logs and sidecar files.
#[derive(Clone, Debug, Serialize)]
pub struct SummationReport {
    /// Full sweeps for [`amen_sum`], reduction rounds for [`binary_sum`].
    pub sweeps_used: usize,
    pub converged: bool,
    /// `|b - x| / |b|` estimated by projecting the residual onto the
    /// enrichment sketch frame; a lower bound on the true relative error
    /// with a floor near machine precision.
    pub final_rel_error_estimate: f64,
    /// Same estimate at the end of every sweep.
    pub residual_history: Vec<f64>,
    /// Relative change of the iterate after every sweep.
    pub delta_history: Vec<f64>,
    /// Iterate ranks at the end of every sweep (largest intermediate of each
    /// round for the binary tree).
    pub rank_history: Vec<RankProfile>,
    /// Largest intermediate profile seen by [`binary_sum`].
    pub max_intermediate: Option<RankProfile>,
    pub timings: PhaseTimings,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseTimings {
    pub setup_ms: f64,
    pub sweep_ms: Vec<f64>,
    pub total_ms: f64,
}
