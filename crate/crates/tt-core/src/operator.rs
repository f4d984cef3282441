use ndarray::prelude::*;

use crate::error::TTError;
use crate::policy::{RankProfile, RoundReport, TruncationPolicy};
use crate::vector::TTVector;
use crate::{C64, DEFAULT_DENSE_CAP};

/// Tensor train of order-4 cores shaped (left rank, out mode, in mode, right
/// rank); the matrix-product-operator counterpart of [`TTVector`].
///
/// Gauge, rounding, addition, and norms operate on the fused view where each
/// core is reshaped to (left rank, out*in, right rank); Frobenius geometry is
/// identical under that identification.
#[derive(Clone, Debug)]
pub struct TTOperator {
    cores: Vec<Array4<C64>>,
    ortho_center: Option<usize>,
}

impl TTOperator {
    pub fn new(cores: Vec<Array4<C64>>) -> Result<Self, TTError> {
        let t = Self {
            cores: cores.into_iter().map(standardize4).collect(),
            ortho_center: None,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn from_cores_unchecked(cores: Vec<Array4<C64>>, ortho_center: Option<usize>) -> Self {
        Self {
            cores,
            ortho_center,
        }
    }

    /// Identity operator, all ranks 1.
    pub fn identity(modes: &[usize]) -> Self {
        assert!(!modes.is_empty());
        let cores = modes
            .iter()
            .map(|&m| {
                Array4::from_shape_fn((1, m, m, 1), |(_, i, j, _)| {
                    if i == j {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        Self {
            cores,
            ortho_center: None,
        }
    }

    /// Deterministic random square operator.
    pub fn random(modes: &[usize], max_rank: usize, seed: u64) -> Self {
        let fused: Vec<usize> = modes.iter().map(|&m| m * m).collect();
        let v = TTVector::random(&fused, max_rank, seed);
        Self::from_fused_vector(&v, modes, modes).expect("random operator")
    }

    pub fn n_sites(&self) -> usize {
        self.cores.len()
    }

    pub fn out_modes(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.dim().1).collect()
    }

    pub fn in_modes(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.dim().2).collect()
    }

    pub fn is_square(&self) -> bool {
        self.cores.iter().all(|c| c.dim().1 == c.dim().2)
    }

    pub fn ranks(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.cores.iter().map(|c| c.dim().0).collect();
        r.push(self.cores.last().map(|c| c.dim().3).unwrap_or(1));
        r
    }

    pub fn core(&self, n: usize) -> &Array4<C64> {
        &self.cores[n]
    }

    pub fn cores(&self) -> &[Array4<C64>] {
        &self.cores
    }

    pub fn ortho_center(&self) -> Option<usize> {
        self.ortho_center
    }

    pub fn rank_profile(&self) -> RankProfile {
        RankProfile::from_ranks(self.ranks())
    }

    /// View as a TT vector over fused out*in modes (same data layout).
    pub fn to_fused_vector(&self) -> TTVector {
        let cores = self
            .cores
            .iter()
            .map(|c| {
                let (rl, m, p, rr) = c.dim();
                standardize4(c.clone())
                    .into_shape((rl, m * p, rr))
                    .expect("fused core")
            })
            .collect();
        TTVector::from_cores_unchecked(cores, self.ortho_center)
    }

    /// Inverse of [`to_fused_vector`] for the given out/in mode split.
    pub fn from_fused_vector(
        v: &TTVector,
        out_modes: &[usize],
        in_modes: &[usize],
    ) -> Result<Self, TTError> {
        if out_modes.len() != v.n_sites() || in_modes.len() != v.n_sites() {
            return Err(TTError::SiteCountMismatch {
                left: out_modes.len(),
                right: v.n_sites(),
            });
        }
        let mut cores = Vec::with_capacity(v.n_sites());
        for (i, core) in v.cores().iter().enumerate() {
            let (rl, m, rr) = core.dim();
            if m != out_modes[i] * in_modes[i] {
                return Err(TTError::ModeMismatch {
                    site: i,
                    left: m,
                    right: out_modes[i] * in_modes[i],
                });
            }
            cores.push(
                crate::linalg::standardize3(core.clone())
                    .into_shape((rl, out_modes[i], in_modes[i], rr))
                    .expect("unfused core"),
            );
        }
        Ok(Self {
            cores,
            ortho_center: v.ortho_center(),
        })
    }

    pub fn validate(&self) -> Result<(), TTError> {
        if self.cores.is_empty() {
            return Err(TTError::EmptyCores);
        }
        for (i, c) in self.cores.iter().enumerate() {
            let (_, m, p, _) = c.dim();
            if m == 0 || p == 0 {
                return Err(TTError::ZeroModeSize { site: i });
            }
        }
        self.to_fused_vector().validate()
    }

    pub fn orthogonalize(&self, center: usize) -> Self {
        let v = self.to_fused_vector().orthogonalize(center);
        Self::from_fused_vector(&v, &self.out_modes(), &self.in_modes())
            .expect("gauge move preserves shape")
    }

    pub fn round(&self, policy: &TruncationPolicy) -> (Self, RoundReport) {
        let (v, report) = self.to_fused_vector().round(policy);
        let t = Self::from_fused_vector(&v, &self.out_modes(), &self.in_modes())
            .expect("rounding preserves modes");
        (t, report)
    }

    pub fn add(&self, other: &Self) -> Result<Self, TTError> {
        self.check_modes(other)?;
        let v = self.to_fused_vector().add(&other.to_fused_vector())?;
        Self::from_fused_vector(&v, &self.out_modes(), &self.in_modes())
    }

    pub fn scale(&self, alpha: C64) -> Self {
        let mut t = self.clone();
        let at = t.ortho_center.unwrap_or(0);
        t.cores[at].mapv_inplace(|z| z * alpha);
        t
    }

    /// Frobenius norm of the represented matrix.
    pub fn norm(&self) -> f64 {
        self.to_fused_vector().norm()
    }

    /// Matrix-vector product in TT form; ranks multiply bond-wise.
    pub fn apply(&self, x: &TTVector) -> Result<TTVector, TTError> {
        if self.n_sites() != x.n_sites() {
            return Err(TTError::SiteCountMismatch {
                left: self.n_sites(),
                right: x.n_sites(),
            });
        }
        let mut cores = Vec::with_capacity(self.n_sites());
        for (i, (a, xc)) in self.cores.iter().zip(x.cores()).enumerate() {
            let (al, m, p, ar) = a.dim();
            let (cl, mx, cd) = xc.dim();
            if p != mx {
                return Err(TTError::ModeMismatch {
                    site: i,
                    left: p,
                    right: mx,
                });
            }
            let at = a
                .view()
                .permuted_axes([0, 1, 3, 2])
                .as_standard_layout()
                .to_owned()
                .into_shape((al * m * ar, p))
                .expect("apply lhs");
            let xt = xc
                .view()
                .permuted_axes([1, 0, 2])
                .as_standard_layout()
                .to_owned()
                .into_shape((p, cl * cd))
                .expect("apply rhs");
            let y = at
                .dot(&xt)
                .into_shape((al, m, ar, cl, cd))
                .expect("apply product");
            let y = y
                .permuted_axes([0, 3, 1, 2, 4])
                .as_standard_layout()
                .to_owned()
                .into_shape((al * cl, m, ar * cd))
                .expect("apply core");
            cores.push(y);
        }
        Ok(TTVector::from_cores_unchecked(cores, None))
    }

    /// Operator product: `self.compose(other)` represents self * other.
    pub fn compose(&self, other: &Self) -> Result<Self, TTError> {
        if self.n_sites() != other.n_sites() {
            return Err(TTError::SiteCountMismatch {
                left: self.n_sites(),
                right: other.n_sites(),
            });
        }
        let mut cores = Vec::with_capacity(self.n_sites());
        for (i, (a, b)) in self.cores.iter().zip(&other.cores).enumerate() {
            let (al, m, p, ar) = a.dim();
            let (bl, pb, q, br) = b.dim();
            if p != pb {
                return Err(TTError::ModeMismatch {
                    site: i,
                    left: p,
                    right: pb,
                });
            }
            let at = a
                .view()
                .permuted_axes([0, 1, 3, 2])
                .as_standard_layout()
                .to_owned()
                .into_shape((al * m * ar, p))
                .expect("compose lhs");
            let bt = b
                .view()
                .permuted_axes([1, 0, 2, 3])
                .as_standard_layout()
                .to_owned()
                .into_shape((p, bl * q * br))
                .expect("compose rhs");
            let y = at
                .dot(&bt)
                .into_shape((al, m, ar, bl, q, br))
                .expect("compose product");
            let y = y
                .permuted_axes([0, 3, 1, 4, 2, 5])
                .as_standard_layout()
                .to_owned()
                .into_shape((al * bl, m, q, ar * br))
                .expect("compose core");
            cores.push(y);
        }
        Ok(Self {
            cores,
            ortho_center: None,
        })
    }

    pub fn to_dense(&self) -> Result<Array2<C64>, TTError> {
        self.to_dense_capped(DEFAULT_DENSE_CAP)
    }

    /// Full matrix; row index fuses out modes (site 0 slowest), column index
    /// fuses in modes likewise.
    pub fn to_dense_capped(&self, cap: usize) -> Result<Array2<C64>, TTError> {
        let rows: u128 = self.out_modes().iter().map(|&m| m as u128).product();
        let cols: u128 = self.in_modes().iter().map(|&m| m as u128).product();
        let entries = rows * cols;
        if entries > cap as u128 {
            return Err(TTError::DenseCapExceeded {
                entries,
                cap: cap as u128,
            });
        }
        let v = self.to_fused_vector().to_dense_capped(cap)?;
        let n = self.n_sites();
        let mut shape = Vec::with_capacity(2 * n);
        for i in 0..n {
            shape.push(self.cores[i].dim().1);
            shape.push(self.cores[i].dim().2);
        }
        let d = v.into_shape(shape).expect("interleaved shape");
        let mut perm: Vec<usize> = (0..2 * n).step_by(2).collect();
        perm.extend((0..2 * n).skip(1).step_by(2));
        let d = d.permuted_axes(perm);
        let d = d.as_standard_layout().to_owned();
        Ok(d
            .into_shape((rows as usize, cols as usize))
            .expect("dense matrix"))
    }

    /// TT-SVD compression of a dense matrix for the given mode splits.
    pub fn from_dense(
        a: ArrayView2<C64>,
        out_modes: &[usize],
        in_modes: &[usize],
        policy: &TruncationPolicy,
    ) -> Result<(Self, RoundReport), TTError> {
        if out_modes.len() != in_modes.len() || out_modes.is_empty() {
            return Err(TTError::SiteCountMismatch {
                left: out_modes.len(),
                right: in_modes.len(),
            });
        }
        let rows = out_modes.iter().fold(1usize, |p, &m| p.saturating_mul(m));
        let cols = in_modes.iter().fold(1usize, |p, &m| p.saturating_mul(m));
        if a.nrows() != rows || a.ncols() != cols {
            return Err(TTError::DenseShapeMismatch {
                len: a.len(),
                expected: rows.saturating_mul(cols),
            });
        }
        let n = out_modes.len();
        let mut shape = Vec::with_capacity(2 * n);
        shape.extend_from_slice(out_modes);
        shape.extend_from_slice(in_modes);
        let d = a.to_owned().into_shape(shape).expect("split shape");
        let mut perm = Vec::with_capacity(2 * n);
        for i in 0..n {
            perm.push(i);
            perm.push(n + i);
        }
        let d = d.permuted_axes(perm);
        let d = d.as_standard_layout().to_owned();
        let flat = d.into_shape(rows * cols).expect("flatten");
        let fused: Vec<usize> = out_modes
            .iter()
            .zip(in_modes)
            .map(|(&m, &p)| m * p)
            .collect();
        let (v, report) = TTVector::from_dense(flat.view(), &fused, policy)?;
        Ok((Self::from_fused_vector(&v, out_modes, in_modes)?, report))
    }

    fn check_modes(&self, other: &Self) -> Result<(), TTError> {
        if self.n_sites() != other.n_sites() {
            return Err(TTError::SiteCountMismatch {
                left: self.n_sites(),
                right: other.n_sites(),
            });
        }
        for i in 0..self.n_sites() {
            let (_, m, p, _) = self.cores[i].dim();
            let (_, m2, p2, _) = other.cores[i].dim();
            if m != m2 || p != p2 {
                return Err(TTError::ModeMismatch {
                    site: i,
                    left: m * p,
                    right: m2 * p2,
                });
            }
        }
        Ok(())
    }
}

fn standardize4(a: Array4<C64>) -> Array4<C64> {
    if a.is_standard_layout() {
        a
    } else {
        let dim = a.raw_dim();
        Array4::from_shape_vec(dim, a.iter().copied().collect()).expect("shape preserved")
    }
}
