//! Pairwise add-and-round baseline over a balanced reduction tree.

use std::time::Instant;

use spin_model::CPOperatorSum;
use tt_core::{RankProfile, TTOperator, TTVector, TruncationPolicy};

use crate::terms::TermTable;
use crate::{PhaseTimings, SummationError, SummationReport};

fn keep_max(slot: &mut Option<RankProfile>, candidate: RankProfile) {
    let replace = match slot {
        Some(p) => candidate.effective_rank > p.effective_rank,
        None => true,
    };
    if replace {
        *slot = Some(candidate);
    }
}

/// Sum all terms by pairwise exact addition followed by rounding, one tree
/// level at a time. The overall tolerance is split evenly across the levels,
/// so the result matches the sum to the policy's relative tolerance, but the
/// pre-round intermediates can reach rank sums far above the final ranks;
/// the report records the largest one seen.
pub fn binary_sum(
    sum: &CPOperatorSum,
    policy: &TruncationPolicy,
) -> Result<(TTOperator, SummationReport), SummationError> {
    let t_total = Instant::now();
    let table = TermTable::from_sum(sum)?;
    let t_count = table.n_terms();
    let rounds = if t_count <= 1 {
        0
    } else {
        (usize::BITS - (t_count - 1).leading_zeros()) as usize
    };
    let mut round_policy = TruncationPolicy::new(if rounds > 0 {
        policy.rel_tolerance / rounds as f64
    } else {
        policy.rel_tolerance
    });
    if let Some(cap) = policy.max_rank {
        round_policy = round_policy.with_max_rank(cap);
    }

    let mut level: Vec<TTVector> = (0..t_count).map(|j| table.term_vector(j)).collect();
    let setup_ms = t_total.elapsed().as_secs_f64() * 1e3;

    let mut rank_history = Vec::new();
    let mut sweep_ms = Vec::new();
    let mut max_intermediate: Option<RankProfile> = None;
    let mut discarded = 0.0;

    while level.len() > 1 {
        let t_round = Instant::now();
        let mut next = Vec::with_capacity((level.len() + 1) / 2);
        let mut round_max: Option<RankProfile> = None;
        for pair in level.chunks(2) {
            if pair.len() == 1 {
                next.push(pair[0].clone());
                continue;
            }
            let raw = pair[0].add(&pair[1])?;
            keep_max(&mut round_max, raw.rank_profile());
            let (rounded, report) = raw.round(&round_policy);
            discarded += report.discarded_abs;
            next.push(rounded);
        }
        if let Some(p) = round_max {
            keep_max(&mut max_intermediate, p.clone());
            rank_history.push(p);
        }
        sweep_ms.push(t_round.elapsed().as_secs_f64() * 1e3);
        level = next;
    }

    let result = level.pop().expect("at least one term");
    let norm = result.norm();
    let op_modes = vec![sum.mode_size(); sum.n_sites()];
    let op = TTOperator::from_fused_vector(&result, &op_modes, &op_modes)?;
    if rank_history.is_empty() {
        rank_history.push(op.rank_profile());
    }
    if max_intermediate.is_none() {
        max_intermediate = Some(op.rank_profile());
    }
    Ok((
        op,
        SummationReport {
            sweeps_used: rounds,
            converged: true,
            final_rel_error_estimate: if norm > 0.0 { discarded / norm } else { 0.0 },
            residual_history: Vec::new(),
            delta_history: Vec::new(),
            rank_history,
            max_intermediate,
            timings: PhaseTimings {
                setup_ms,
                sweep_ms,
                total_ms: t_total.elapsed().as_secs_f64() * 1e3,
            },
        },
    ))
}
