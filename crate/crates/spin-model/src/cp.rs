use std::collections::BTreeMap;

use ndarray::linalg::kron;
use ndarray::prelude::*;
use ndarray::s;
use tt_core::{C64, TTOperator};

use crate::constants::{identity2, s_minus, s_plus, sx, sy, sz, TWO_PI};
use crate::error::ModelError;
use crate::system::SpinSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Hilbert,
    Liouville,
}

impl Space {
    /// Local physical dimension per site.
    pub fn mode_size(self) -> usize {
        match self {
            Space::Hilbert => 2,
            Space::Liouville => 4,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Space::Hilbert => "hilbert",
            Space::Liouville => "liouville",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalKind {
    Identity,
    Sx,
    Sy,
    Sz,
    SPlus,
    SMinus,
    Custom,
}

impl LocalKind {
    fn name(self) -> &'static str {
        match self {
            LocalKind::Identity => "identity",
            LocalKind::Sx => "sx",
            LocalKind::Sy => "sy",
            LocalKind::Sz => "sz",
            LocalKind::SPlus => "s+",
            LocalKind::SMinus => "s-",
            LocalKind::Custom => "custom",
        }
    }
}

/// A single-site operator factor, tagged so standard spin matrices stay
/// recognizable after they have been built.
#[derive(Clone, Debug)]
pub struct LocalOperator {
    kind: LocalKind,
    matrix: Array2<C64>,
}

impl LocalOperator {
    pub fn identity() -> Self {
        Self {
            kind: LocalKind::Identity,
            matrix: identity2(),
        }
    }

    pub fn sx() -> Self {
        Self {
            kind: LocalKind::Sx,
            matrix: sx(),
        }
    }

    pub fn sy() -> Self {
        Self {
            kind: LocalKind::Sy,
            matrix: sy(),
        }
    }

    pub fn sz() -> Self {
        Self {
            kind: LocalKind::Sz,
            matrix: sz(),
        }
    }

    pub fn s_plus() -> Self {
        Self {
            kind: LocalKind::SPlus,
            matrix: s_plus(),
        }
    }

    pub fn s_minus() -> Self {
        Self {
            kind: LocalKind::SMinus,
            matrix: s_minus(),
        }
    }

    pub fn custom(matrix: Array2<C64>) -> Self {
        Self {
            kind: LocalKind::Custom,
            matrix,
        }
    }

    pub fn kind(&self) -> LocalKind {
        self.kind
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    /// Does the stored matrix match its tag under the spin-1/2 convention?
    fn tag_consistent(&self) -> bool {
        let want = match self.kind {
            LocalKind::Identity => identity2(),
            LocalKind::Sx => sx(),
            LocalKind::Sy => sy(),
            LocalKind::Sz => sz(),
            LocalKind::SPlus => s_plus(),
            LocalKind::SMinus => s_minus(),
            LocalKind::Custom => return self.matrix.is_square(),
        };
        self.matrix == want
    }
}

/// One Kronecker term: coeff times the product of the listed local factors,
/// identity on every site not in the map.
#[derive(Clone, Debug)]
pub struct CPTerm {
    pub coeff: C64,
    pub factors: BTreeMap<usize, LocalOperator>,
}

impl CPTerm {
    pub fn new(coeff: C64, factors: BTreeMap<usize, LocalOperator>) -> Self {
        Self { coeff, factors }
    }
}

/// An operator in canonical polyadic form: a plain list of Kronecker terms.
/// This is the exact but rank-explosive representation the TT compressors
/// consume.
#[derive(Clone, Debug)]
pub struct CPOperatorSum {
    terms: Vec<CPTerm>,
    space: Space,
    n_sites: usize,
}

impl CPOperatorSum {
    pub fn new(terms: Vec<CPTerm>, space: Space, n_sites: usize) -> Result<Self, ModelError> {
        let sum = Self {
            terms,
            space,
            n_sites,
        };
        sum.validate()?;
        Ok(sum)
    }

    pub fn terms(&self) -> &[CPTerm] {
        &self.terms
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn mode_size(&self) -> usize {
        self.space.mode_size()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let m = self.space.mode_size();
        for (t, term) in self.terms.iter().enumerate() {
            if term.factors.is_empty() {
                return Err(ModelError::EmptyFactors { term: t });
            }
            for (&site, local) in &term.factors {
                if site >= self.n_sites {
                    return Err(ModelError::SiteOutOfRange {
                        term: t,
                        site,
                        n: self.n_sites,
                    });
                }
                let (rows, cols) = (local.matrix.nrows(), local.matrix.ncols());
                if rows != m || cols != m {
                    return Err(ModelError::LocalDimension {
                        term: t,
                        site,
                        rows,
                        cols,
                        expected: m,
                    });
                }
                if !local.tag_consistent() {
                    return Err(ModelError::TagMismatch {
                        term: t,
                        site,
                        tag: local.kind.name(),
                    });
                }
            }
        }
        Ok(())
    }

    /// The local matrix of `term` at `site`: its factor, or the identity.
    pub fn local_matrix(&self, term: usize, site: usize) -> Array2<C64> {
        match self.terms[term].factors.get(&site) {
            Some(local) => local.matrix.clone(),
            None => Array2::eye(self.space.mode_size()),
        }
    }

    /// One term as a rank-1 TT operator (coefficient folded into site 0).
    pub fn term_as_tt(&self, term: usize) -> TTOperator {
        let m = self.space.mode_size();
        let cores = (0..self.n_sites)
            .map(|site| {
                let mut mat = self.local_matrix(term, site);
                if site == 0 {
                    mat.mapv_inplace(|z| z * self.terms[term].coeff);
                }
                let mut core = Array4::zeros((1, m, m, 1));
                core.slice_mut(s![0, .., .., 0]).assign(&mat);
                core
            })
            .collect();
        TTOperator::from_cores_unchecked(cores, None)
    }
}

/// Hamiltonian of a spin system in CP form (Hilbert space, rad/s): one Zeeman
/// term per spin, the full scalar product for same-isotope couplings, and the
/// secular zz part for hetero couplings.
pub fn hamiltonian_terms(sys: &SpinSystem) -> CPOperatorSum {
    let n = sys.n_spins();
    let mut terms = Vec::new();
    for (k, spin) in sys.spins.iter().enumerate() {
        let coeff = C64::new(TWO_PI * spin.offset_hz, 0.0);
        let mut factors = BTreeMap::new();
        factors.insert(k, LocalOperator::sz());
        terms.push(CPTerm::new(coeff, factors));
    }
    for c in &sys.couplings {
        let coeff = C64::new(TWO_PI * c.j_hz, 0.0);
        if sys.same_isotope(c.i, c.j) {
            for make in [LocalOperator::sx, LocalOperator::sy, LocalOperator::sz] {
                let mut factors = BTreeMap::new();
                factors.insert(c.i, make());
                factors.insert(c.j, make());
                terms.push(CPTerm::new(coeff, factors));
            }
        } else {
            let mut factors = BTreeMap::new();
            factors.insert(c.i, LocalOperator::sz());
            factors.insert(c.j, LocalOperator::sz());
            terms.push(CPTerm::new(coeff, factors));
        }
    }
    CPOperatorSum {
        terms,
        space: Space::Hilbert,
        n_sites: n,
    }
}

/// Commutation superoperator of a Hilbert-space sum: each term X becomes the
/// pair +(X tensor 1) and -(1 tensor X^T) acting on row-major vectorized
/// density matrices, applied site by site.
pub fn commutation_superoperator(ham: &CPOperatorSum) -> Result<CPOperatorSum, ModelError> {
    if ham.space != Space::Hilbert {
        return Err(ModelError::SpaceMismatch {
            expected: "hilbert",
            found: ham.space.name(),
        });
    }
    let id = identity2();
    let mut terms = Vec::with_capacity(2 * ham.terms.len());
    for term in &ham.terms {
        let mut left = BTreeMap::new();
        let mut right = BTreeMap::new();
        for (&site, local) in &term.factors {
            left.insert(site, LocalOperator::custom(kron(&local.matrix, &id)));
            right.insert(site, LocalOperator::custom(kron(&id, &local.matrix.t())));
        }
        terms.push(CPTerm::new(term.coeff, left));
        terms.push(CPTerm::new(-term.coeff, right));
    }
    Ok(CPOperatorSum {
        terms,
        space: Space::Liouville,
        n_sites: ham.n_sites,
    })
}
