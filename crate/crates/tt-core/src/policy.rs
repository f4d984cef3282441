use serde::Serialize;

/// Rule distributing the total relative budget over truncated bonds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BudgetRule {
    /// eps / sqrt(#bonds) per bond, the standard TT-SVD error split.
    #[default]
    SqrtBonds,
}

/// Rounding control: relative Frobenius budget, optional hard rank cap, and
/// the per-bond budget rule.
#[derive(Clone, Copy, Debug)]
pub struct TruncationPolicy {
    pub rel_tolerance: f64,
    pub max_rank: Option<usize>,
    pub per_site_budget: BudgetRule,
}

impl TruncationPolicy {
    pub fn new(rel_tolerance: f64) -> Self {
        assert!(
            rel_tolerance >= 0.0 && rel_tolerance.is_finite(),
            "rel_tolerance must be a nonnegative finite number"
        );
        Self {
            rel_tolerance,
            max_rank: None,
            per_site_budget: BudgetRule::SqrtBonds,
        }
    }

    pub fn with_max_rank(mut self, cap: usize) -> Self {
        assert!(cap >= 1, "max_rank cap must be at least 1");
        self.max_rank = Some(cap);
        self
    }
}

/// Bond ranks (r_0, ..., r_N) plus the effective rank k defined by
/// N k^2 = sum_n r_{n-1} r_n.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankProfile {
    pub ranks: Vec<usize>,
    pub effective_rank: f64,
}

impl RankProfile {
    pub fn from_ranks(ranks: Vec<usize>) -> Self {
        assert!(ranks.len() >= 2, "rank list needs at least two entries");
        let n = ranks.len() - 1;
        let sum: usize = ranks.windows(2).map(|w| w[0] * w[1]).sum();
        let effective_rank = (sum as f64 / n as f64).sqrt();
        Self {
            ranks,
            effective_rank,
        }
    }

    pub fn max_rank(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(0)
    }
}

/// What a rounding pass actually did.
#[derive(Clone, Copy, Debug, Default)]
pub struct RoundReport {
    /// sqrt of the summed squared singular values that were discarded.
    pub discarded_abs: f64,
    /// Frobenius norm of the input, for turning the above into a relative figure.
    pub norm_before: f64,
    /// True when the hard rank cap forced truncation past the error budget.
    pub cap_limited: bool,
}

impl RoundReport {
    pub fn discarded_rel(&self) -> f64 {
        if self.norm_before > 0.0 {
            self.discarded_abs / self.norm_before
        } else {
            0.0
        }
    }

}

pub(crate) fn bond_budget(policy: &TruncationPolicy, norm: f64, bonds: usize) -> f64 {
    match policy.per_site_budget {
        BudgetRule::SqrtBonds => policy.rel_tolerance * norm / (bonds.max(1) as f64).sqrt(),
    }
}

/// How many leading singular values to keep: trailing values are dropped while
/// their squared sum stays within the absolute budget, at least one is kept,
/// and the hard cap wins over the budget. Returns (kept, discarded squared
/// mass, cap-limited flag).
pub(crate) fn truncation_rank(
    s: &[f64],
    abs_budget: f64,
    max_rank: Option<usize>,
) -> (usize, f64, bool) {
    let budget_sq = abs_budget * abs_budget;
    let mut tail = 0.0;
    let mut k = s.len();
    while k > 1 {
        let t = tail + s[k - 1] * s[k - 1];
        if t <= budget_sq {
            tail = t;
            k -= 1;
        } else {
            break;
        }
    }
    let mut cap_limited = false;
    if let Some(cap) = max_rank {
        if k > cap {
            for v in &s[cap..k] {
                tail += v * v;
            }
            k = cap;
            cap_limited = true;
        }
    }
    (k, tail, cap_limited)
}
