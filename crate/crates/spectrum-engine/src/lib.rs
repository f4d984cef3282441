//! Frequency-domain NMR spectra in tensor-train form.
//!
//! For each requested angular frequency the engine assembles the shifted
//! normal operator (H + w)^2 + mu^2 of the commutation superoperator H,
//! solves it against the vectorized detection state with the AMEn solver,
//! and reads off the absorption amplitude O(w) = mu * Re <d, y>. The axis
//! sign convention (a spin with offset +v peaks at freq_hz = +v, i.e. at
//! w = -2 pi v) is fixed by the dense oracle, not assumed.

use amen_solver::{SolveReport, SolverConfig};
use serde::Serialize;
use spin_model::{ModelError, SpinSystem};
use thiserror::Error;
use tt_core::{RankProfile, TTError};

mod assemble;
mod run;

pub use assemble::{assemble_shifted, build_liouvillian, detection_state};
pub use run::spectrum;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("frequency grid is empty")]
    EmptyGrid,
    #[error("frequency grid must be strictly increasing (violated at index {index})")]
    GridOrder { index: usize },
    #[error("frequency grid contains a non-finite value {omega}")]
    NonFiniteFrequency { omega: f64 },
    #[error("damping mu must be positive, got {mu}")]
    NonPositiveDamping { mu: f64 },
    #[error("tolerance must be positive and finite, got {tol}")]
    NonPositiveTolerance { tol: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Summation(#[from] amen_summation::SummationError),
    #[error(transparent)]
    Tensor(#[from] TTError),
}

/// Which sweep algorithm solves the per-point linear systems.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverBackend {
    /// Rank-adaptive AMEn with residual enrichment.
    #[default]
    Amen,
    /// One-site DMRG at frozen ranks; kept as the comparison baseline.
    Dmrg,
}

/// One spectrum evaluation: which system, what to detect, where, and how
/// hard the per-point solver should try.
#[derive(Clone, Debug)]
pub struct SpectrumRequest {
    pub system: SpinSystem,
    /// Detection isotope; the vectorized total S+ over its spins serves as
    /// both the right-hand side and the detection state.
    pub isotope: String,
    /// Angular frequencies in rad/s, strictly increasing.
    pub omega_grid: Vec<f64>,
    pub solver_cfg: SolverConfig,
    pub backend: SolverBackend,
    /// Rounding tolerance for operator assembly; defaults to a tenth of the
    /// solver tolerance.
    pub op_round_tol: Option<f64>,
    /// Seed each solve with the previous point's solution (on by default).
    pub warm_start: bool,
}

impl SpectrumRequest {
    pub fn new(
        system: SpinSystem,
        isotope: impl Into<String>,
        omega_grid: Vec<f64>,
        solver_cfg: SolverConfig,
    ) -> Self {
        Self {
            system,
            isotope: isotope.into(),
            omega_grid,
            solver_cfg,
            backend: SolverBackend::default(),
            op_round_tol: None,
            warm_start: true,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), SpectrumError> {
        if self.omega_grid.is_empty() {
            return Err(SpectrumError::EmptyGrid);
        }
        if let Some(&omega) = self.omega_grid.iter().find(|w| !w.is_finite()) {
            return Err(SpectrumError::NonFiniteFrequency { omega });
        }
        for (i, w) in self.omega_grid.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(SpectrumError::GridOrder { index: i + 1 });
            }
        }
        let mu = self.system.damping_mu;
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(SpectrumError::NonPositiveDamping { mu });
        }
        let eps = self.solver_cfg.rel_tolerance;
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(SpectrumError::NonPositiveTolerance { tol: eps });
        }
        if let Some(tol) = self.op_round_tol {
            if !(tol > 0.0) || !tol.is_finite() {
                return Err(SpectrumError::NonPositiveTolerance { tol });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumPoint {
    pub omega_rad_s: f64,
    /// Printed axis, freq_hz = -omega / 2 pi.
    pub freq_hz: f64,
    /// Absorption amplitude; NaN when the point is flagged.
    pub amplitude: f64,
    pub converged: bool,
    pub report: SolveReport,
}

impl SpectrumPoint {
    pub fn sweeps(&self) -> usize {
        self.report.sweeps_used
    }

    pub fn residual(&self) -> f64 {
        self.report
            .residual_history
            .last()
            .copied()
            .unwrap_or(f64::NAN)
    }

    pub fn effective_rank(&self) -> f64 {
        self.report
            .rank_history
            .last()
            .map(|p| p.effective_rank)
            .unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    /// One entry per grid point, ascending in omega.
    pub points: Vec<SpectrumPoint>,
    pub liouvillian_ranks: RankProfile,
    pub liouvillian_sq_ranks: RankProfile,
}

impl SpectrumResult {
    pub fn converged_fraction(&self) -> f64 {
        let hits = self.points.iter().filter(|p| p.converged).count();
        hits as f64 / self.points.len() as f64
    }

    /// CSV rows ascend in freq_hz, the printed axis, so they walk the omega
    /// grid backwards.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write;
        let mut out = String::from("omega_rad_s,freq_hz,amplitude,sweeps,residual,eff_rank\n");
        for p in self.points.iter().rev() {
            writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{},{:.6e},{:.4}",
                p.omega_rad_s,
                p.freq_hz,
                p.amplitude,
                p.sweeps(),
                p.residual(),
                p.effective_rank()
            )
            .expect("string write");
        }
        out
    }

    /// Full diagnostics sidecar (per-point reports, assembly rank profiles).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectrum serialization")
    }
}
