use ndarray::prelude::*;
use ndarray::{concatenate, s};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::TTError;
use crate::linalg::{
    adjoint, frob, left_ortho_deviation, left_unfold, right_ortho_deviation, right_unfold,
    standardize3, thin_qr, thin_svd,
};
use crate::policy::{bond_budget, truncation_rank, RankProfile, RoundReport, TruncationPolicy};
use crate::{C64, DEFAULT_DENSE_CAP, ORTHO_TOL};

/// Tensor train of order-3 cores shaped (left rank, mode, right rank).
///
/// `ortho_center = Some(c)` means every core left of `c` is left-orthonormal
/// and every core right of `c` is right-orthonormal; the represented tensor's
/// norm then equals the Frobenius norm of core `c`.
#[derive(Clone, Debug)]
pub struct TTVector {
    cores: Vec<Array3<C64>>,
    ortho_center: Option<usize>,
}

impl TTVector {
    /// Build from cores, checking the structural invariants.
    pub fn new(cores: Vec<Array3<C64>>) -> Result<Self, TTError> {
        let t = Self {
            cores: cores.into_iter().map(standardize3).collect(),
            ortho_center: None,
        };
        t.validate()?;
        Ok(t)
    }

    /// Build without validation; the caller asserts the rank chain and, when a
    /// center is given, the gauge conditions. Intended for sweep algorithms
    /// that maintain these invariants incrementally.
    pub fn from_cores_unchecked(cores: Vec<Array3<C64>>, ortho_center: Option<usize>) -> Self {
        Self {
            cores,
            ortho_center,
        }
    }

    /// All-zero tensor in the canonical all-rank-1 form.
    pub fn zeros(modes: &[usize]) -> Self {
        assert!(!modes.is_empty());
        Self {
            cores: modes.iter().map(|&m| Array3::zeros((1, m, 1))).collect(),
            ortho_center: None,
        }
    }

    /// Deterministic random tensor with entries uniform in the complex unit
    /// square; ranks are `max_rank` clipped to the unfolding dimensions.
    pub fn random(modes: &[usize], max_rank: usize, seed: u64) -> Self {
        assert!(!modes.is_empty() && max_rank >= 1);
        let n = modes.len();
        let mut ranks = vec![1usize; n + 1];
        for i in 1..n {
            let left = modes[..i].iter().fold(1usize, |a, &b| a.saturating_mul(b));
            let right = modes[i..].iter().fold(1usize, |a, &b| a.saturating_mul(b));
            ranks[i] = max_rank.min(left).min(right);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cores = (0..n)
            .map(|i| {
                Array3::from_shape_fn((ranks[i], modes[i], ranks[i + 1]), |_| {
                    C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
                })
            })
            .collect();
        Self {
            cores,
            ortho_center: None,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.cores.len()
    }

    pub fn mode_sizes(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.dim().1).collect()
    }

    /// Bond ranks (r_0, ..., r_N).
    pub fn ranks(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.cores.iter().map(|c| c.dim().0).collect();
        r.push(self.cores.last().map(|c| c.dim().2).unwrap_or(1));
        r
    }

    pub fn core(&self, n: usize) -> &Array3<C64> {
        &self.cores[n]
    }

    pub fn cores(&self) -> &[Array3<C64>] {
        &self.cores
    }

    pub fn ortho_center(&self) -> Option<usize> {
        self.ortho_center
    }

    pub fn rank_profile(&self) -> RankProfile {
        RankProfile::from_ranks(self.ranks())
    }

    /// Check every structural invariant; reports the first violation.
    pub fn validate(&self) -> Result<(), TTError> {
        if self.cores.is_empty() {
            return Err(TTError::EmptyCores);
        }
        let n = self.cores.len();
        let r0 = self.cores[0].dim().0;
        let rn = self.cores[n - 1].dim().2;
        if r0 != 1 || rn != 1 {
            return Err(TTError::BoundaryRank {
                left: r0,
                right: rn,
            });
        }
        for (i, c) in self.cores.iter().enumerate() {
            let (rl, m, rr) = c.dim();
            if m == 0 {
                return Err(TTError::ZeroModeSize { site: i });
            }
            if rl == 0 || rr == 0 {
                return Err(TTError::ZeroRank { site: i });
            }
        }
        for bond in 1..n {
            let left = self.cores[bond - 1].dim().2;
            let right = self.cores[bond].dim().0;
            if left != right {
                return Err(TTError::RankMismatch { bond, left, right });
            }
        }
        if let Some(c) = self.ortho_center {
            if c >= n {
                return Err(TTError::CenterOutOfRange {
                    center: c,
                    sites: n,
                });
            }
            for (i, core) in self.cores.iter().enumerate() {
                let dev = if i < c {
                    left_ortho_deviation(core)
                } else if i > c {
                    right_ortho_deviation(core)
                } else {
                    continue;
                };
                if dev > ORTHO_TOL {
                    return Err(TTError::NotOrthogonal {
                        site: i,
                        deviation: dev,
                    });
                }
            }
        }
        Ok(())
    }

    /// Same tensor with the gauge center moved to `center` by QR sweeps.
    pub fn orthogonalize(&self, center: usize) -> Self {
        let mut t = self.clone();
        t.move_center(center);
        t
    }

    pub(crate) fn move_center(&mut self, center: usize) {
        let n = self.cores.len();
        assert!(center < n, "center {center} out of range for {n} sites");
        match self.ortho_center {
            Some(c) if c == center => {}
            Some(c) if c < center => {
                for i in c..center {
                    self.push_right(i);
                }
            }
            Some(c) => {
                for i in ((center + 1)..=c).rev() {
                    self.push_left(i);
                }
            }
            None => {
                for i in 0..center {
                    self.push_right(i);
                }
                for i in ((center + 1)..n).rev() {
                    self.push_left(i);
                }
            }
        }
        self.ortho_center = Some(center);
    }

    /// QR-orthonormalize core i, absorbing the triangular factor rightwards.
    fn push_right(&mut self, i: usize) {
        let (rl, m, _) = self.cores[i].dim();
        let (q, r) = thin_qr(left_unfold(&self.cores[i]).view());
        let k = q.ncols();
        self.cores[i] = q.into_shape((rl, m, k)).expect("qr shape");
        let (_, m2, r2) = self.cores[i + 1].dim();
        let new_next = r.dot(&right_unfold(&self.cores[i + 1]));
        self.cores[i + 1] = new_next.into_shape((k, m2, r2)).expect("carry shape");
    }

    /// Row-orthonormalize core i, absorbing the triangular factor leftwards.
    fn push_left(&mut self, i: usize) {
        let (_, m, rr) = self.cores[i].dim();
        let ah = adjoint(right_unfold(&self.cores[i]).view());
        let (q, r) = thin_qr(ah.view());
        let k = q.ncols();
        self.cores[i] = adjoint(q.view()).into_shape((k, m, rr)).expect("lq shape");
        let (r0, m0, _) = self.cores[i - 1].dim();
        let new_prev = left_unfold(&self.cores[i - 1]).dot(&adjoint(r.view()));
        self.cores[i - 1] = new_prev.into_shape((r0, m0, k)).expect("carry shape");
    }

    /// TT-SVD rounding: right-orthogonalize, then truncate bond by bond left
    /// to right under the policy's budget. The report carries the actually
    /// discarded singular mass and whether the hard cap forced extra loss.
    pub fn round(&self, policy: &TruncationPolicy) -> (Self, RoundReport) {
        let mut t = self.orthogonalize(0);
        let norm = frob(&t.cores[0]);
        let n = t.cores.len();
        let mut report = RoundReport {
            discarded_abs: 0.0,
            norm_before: norm,
            cap_limited: false,
        };
        if n == 1 {
            return (t, report);
        }
        let budget = bond_budget(policy, norm, n - 1);
        let mut discarded_sq = 0.0;
        for i in 0..n - 1 {
            let (rl, m, _) = t.cores[i].dim();
            let (u, sv, vt) = thin_svd(left_unfold(&t.cores[i]).view());
            let (k, disc, capped) =
                truncation_rank(sv.as_slice().expect("contiguous"), budget, policy.max_rank);
            discarded_sq += disc;
            report.cap_limited |= capped;
            t.cores[i] = u
                .slice(s![.., ..k])
                .to_owned()
                .into_shape((rl, m, k))
                .expect("svd shape");
            let mut carry = vt.slice(s![..k, ..]).to_owned();
            for (j, mut row) in carry.outer_iter_mut().enumerate() {
                let sj = sv[j];
                row.mapv_inplace(|z| z * sj);
            }
            let (_, m2, r2) = t.cores[i + 1].dim();
            let new_next = carry.dot(&right_unfold(&t.cores[i + 1]));
            t.cores[i + 1] = new_next.into_shape((k, m2, r2)).expect("carry shape");
        }
        t.ortho_center = Some(n - 1);
        report.discarded_abs = discarded_sq.sqrt();
        (t, report)
    }

    /// Exact sum by block concatenation; interior ranks add, no rounding.
    pub fn add(&self, other: &Self) -> Result<Self, TTError> {
        self.check_modes(other)?;
        let n = self.cores.len();
        if n == 1 {
            return Ok(Self {
                cores: vec![&self.cores[0] + &other.cores[0]],
                ortho_center: None,
            });
        }
        let mut cores = Vec::with_capacity(n);
        for i in 0..n {
            let a = &self.cores[i];
            let b = &other.cores[i];
            // concatenate can hand back axis-swapped layouts; normalize so
            // every stored core stays row-major
            let core = if i == 0 {
                standardize3(concatenate(Axis(2), &[a.view(), b.view()]).expect("concat"))
            } else if i == n - 1 {
                standardize3(concatenate(Axis(0), &[a.view(), b.view()]).expect("concat"))
            } else {
                let (al, m, ar) = a.dim();
                let (bl, _, br) = b.dim();
                let mut c = Array3::zeros((al + bl, m, ar + br));
                c.slice_mut(s![..al, .., ..ar]).assign(a);
                c.slice_mut(s![al.., .., ar..]).assign(b);
                c
            };
            cores.push(core);
        }
        Ok(Self {
            cores,
            ortho_center: None,
        })
    }

    /// Scalar multiple; scales the center core (or the first when no gauge).
    pub fn scale(&self, alpha: C64) -> Self {
        let mut t = self.clone();
        let at = t.ortho_center.unwrap_or(0);
        t.cores[at].mapv_inplace(|z| z * alpha);
        t
    }

    /// Dot product, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<C64, TTError> {
        self.check_modes(other)?;
        let mut e = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
        for (xc, yc) in self.cores.iter().zip(&other.cores) {
            let (xa, m, _) = xc.dim();
            let yd = yc.dim().2;
            let t = e.dot(&right_unfold(yc));
            let t = t.into_shape((xa * m, yd)).expect("env shape");
            e = adjoint(left_unfold(xc).view()).dot(&t);
        }
        Ok(e[[0, 0]])
    }

    /// Frobenius norm, computed from the gauge center (orthogonalizing a copy
    /// first when no center is set).
    pub fn norm(&self) -> f64 {
        match self.ortho_center {
            Some(c) => frob(&self.cores[c]),
            None => {
                let t = self.orthogonalize(0);
                frob(&t.cores[0])
            }
        }
    }

    pub fn to_dense(&self) -> Result<Array1<C64>, TTError> {
        self.to_dense_capped(DEFAULT_DENSE_CAP)
    }

    /// Full reconstruction; the leftmost site index varies slowest.
    pub fn to_dense_capped(&self, cap: usize) -> Result<Array1<C64>, TTError> {
        let entries: u128 = self
            .mode_sizes()
            .iter()
            .map(|&m| m as u128)
            .product();
        if entries > cap as u128 {
            return Err(TTError::DenseCapExceeded {
                entries,
                cap: cap as u128,
            });
        }
        let mut acc = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
        for c in &self.cores {
            let (_, m, rr) = c.dim();
            let t = acc.dot(&right_unfold(c));
            let rows = t.nrows();
            acc = t.into_shape((rows * m, rr)).expect("dense fold");
        }
        let len = acc.nrows();
        Ok(acc.into_shape(len).expect("dense flatten"))
    }

    /// TT-SVD compression of a dense tensor with the given mode sizes.
    pub fn from_dense(
        a: ArrayView1<C64>,
        modes: &[usize],
        policy: &TruncationPolicy,
    ) -> Result<(Self, RoundReport), TTError> {
        let expected = modes.iter().fold(1usize, |p, &m| p.saturating_mul(m));
        if modes.is_empty() || modes.contains(&0) || a.len() != expected {
            return Err(TTError::DenseShapeMismatch {
                len: a.len(),
                expected,
            });
        }
        let n = modes.len();
        let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let budget = bond_budget(policy, norm, n.saturating_sub(1).max(1));
        let mut report = RoundReport {
            discarded_abs: 0.0,
            norm_before: norm,
            cap_limited: false,
        };
        let mut rest = a.to_owned().into_shape((1, a.len())).expect("row");
        let mut cores = Vec::with_capacity(n);
        let mut discarded_sq = 0.0;
        for &m in &modes[..n - 1] {
            let r = rest.nrows();
            let cols = rest.ncols() / m;
            let mat = rest.into_shape((r * m, cols)).expect("unfold");
            let (u, sv, vt) = thin_svd(mat.view());
            let (k, disc, capped) =
                truncation_rank(sv.as_slice().expect("contiguous"), budget, policy.max_rank);
            discarded_sq += disc;
            report.cap_limited |= capped;
            cores.push(
                u.slice(s![.., ..k])
                    .to_owned()
                    .into_shape((r, m, k))
                    .expect("core shape"),
            );
            let mut carry = vt.slice(s![..k, ..]).to_owned();
            for (j, mut row) in carry.outer_iter_mut().enumerate() {
                let sj = sv[j];
                row.mapv_inplace(|z| z * sj);
            }
            rest = carry;
        }
        let r = rest.nrows();
        let m = modes[n - 1];
        cores.push(rest.into_shape((r, m, 1)).expect("last core"));
        report.discarded_abs = discarded_sq.sqrt();
        Ok((
            Self {
                cores,
                ortho_center: Some(n - 1),
            },
            report,
        ))
    }

    fn check_modes(&self, other: &Self) -> Result<(), TTError> {
        if self.n_sites() != other.n_sites() {
            return Err(TTError::SiteCountMismatch {
                left: self.n_sites(),
                right: other.n_sites(),
            });
        }
        for (i, (a, b)) in self.cores.iter().zip(&other.cores).enumerate() {
            if a.dim().1 != b.dim().1 {
                return Err(TTError::ModeMismatch {
                    site: i,
                    left: a.dim().1,
                    right: b.dim().1,
                });
            }
        }
        Ok(())
    }
}
