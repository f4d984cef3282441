use ndarray::prelude::*;
use spin_model::CPOperatorSum;
use tt_core::{C64, TTVector};

use crate::SummationError;

/// Per-site factor table of a CP sum, flattened to the fused vector picture:
/// row `j` of `h[n]` is the row-major vectorization of term `j`'s local
/// matrix at site `n` (identity where the term touches nothing), with the
/// scalar coefficient folded into site 0.
pub(crate) struct TermTable {
    pub n_sites: usize,
    /// Fused mode size, the square of the local matrix dimension.
    pub mode: usize,
    pub h: Vec<Array2<C64>>,
}

impl TermTable {
    pub fn from_sum(sum: &CPOperatorSum) -> Result<Self, SummationError> {
        if sum.terms().is_empty() {
            return Err(SummationError::EmptySum);
        }
        let n = sum.n_sites();
        let m = sum.mode_size();
        let t = sum.terms().len();
        let mut h = Vec::with_capacity(n);
        for site in 0..n {
            let mut mat = Array2::zeros((t, m * m));
            for j in 0..t {
                let local = sum.local_matrix(j, site);
                let mut row = mat.row_mut(j);
                for a in 0..m {
                    for b in 0..m {
                        row[a * m + b] = local[[a, b]];
                    }
                }
                if site == 0 {
                    let coeff = sum.terms()[j].coeff;
                    row.mapv_inplace(|z| z * coeff);
                }
            }
            h.push(mat);
        }
        Ok(Self {
            n_sites: n,
            mode: m * m,
            h,
        })
    }

    pub fn n_terms(&self) -> usize {
        self.h[0].nrows()
    }

    /// Frobenius norm of the full sum via the Gram matrices of the per-site
    /// factors; never forms the dense tensor.
    pub fn b_norm(&self) -> f64 {
        let t = self.n_terms();
        let mut s = Array2::<C64>::ones((t, t));
        for hn in &self.h {
            let g = hn.mapv(|z| z.conj()).dot(&hn.t());
            s = s * g;
        }
        s.sum().re.max(0.0).sqrt()
    }

    /// One term as a rank-1 fused TT vector.
    pub fn term_vector(&self, j: usize) -> TTVector {
        let cores = (0..self.n_sites)
            .map(|n| {
                let mut c = Array3::zeros((1, self.mode, 1));
                for i in 0..self.mode {
                    c[[0, i, 0]] = self.h[n][[j, i]];
                }
                c
            })
            .collect();
        TTVector::from_cores_unchecked(cores, None)
    }
}
