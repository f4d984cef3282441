use ndarray::prelude::*;
use ndarray::s;
use tt_core::{C64, TTOperator, TTVector};

use crate::constants::{identity2, s_plus, sz, vec_row_major};
use crate::error::ModelError;
use crate::system::SpinSystem;

/// Total-Sz operator as the exact two-band TT: first core [sz 1], interior
/// cores [[1 0], [sz 1]], last core [1; sz]^T read along the bond. All bond
/// ranks are 2 and the cores store 4N-4 local blocks.
pub fn analytic_total_sz(n: usize) -> Result<TTOperator, ModelError> {
    if n < 2 {
        return Err(ModelError::TooFewSpins { n, need: 2 });
    }
    Ok(two_band_operator(&sz(), n))
}

/// All-pairs zz sum over m > n as the exact three-band TT; bond ranks 3,
/// 9N-12 stored local blocks.
pub fn analytic_zz_chain(n: usize) -> Result<TTOperator, ModelError> {
    if n < 2 {
        return Err(ModelError::TooFewSpins { n, need: 2 });
    }
    let szm = sz();
    let id = identity2();
    let zero = Array2::<C64>::zeros((2, 2));
    let mut cores = Vec::with_capacity(n);
    // bands: 0 = pair complete, 1 = one sz placed, 2 = nothing placed yet
    cores.push(op_core(&[&[&zero, &szm, &id]]));
    for _ in 1..n - 1 {
        cores.push(op_core(&[
            &[&id, &zero, &zero],
            &[&szm, &id, &zero],
            &[&zero, &szm, &id],
        ]));
    }
    cores.push(op_core(&[&[&id], &[&szm], &[&zero]]));
    Ok(TTOperator::from_cores_unchecked(cores, None))
}

/// Vectorized sum of s+ over every spin of the requested isotope, as a TT
/// vector over local mode 4; the Eq-(5)-style two-band layout gives rank 2
/// (rank 1 for a single spin).
pub fn detection_state(sys: &SpinSystem, isotope: &str) -> Result<TTVector, ModelError> {
    let n = sys.n_spins();
    let hits: Vec<bool> = sys.spins.iter().map(|s| s.isotope == isotope).collect();
    if !hits.iter().any(|&h| h) {
        return Err(ModelError::NoSpinsOfIsotope {
            isotope: isotope.to_string(),
        });
    }
    let vplus = vec_row_major(s_plus().view());
    let vid = vec_row_major(identity2().view());
    let vzero = Array1::<C64>::zeros(4);
    let local = |site: usize| if hits[site] { &vplus } else { &vzero };

    if n == 1 {
        let mut core = Array3::zeros((1, 4, 1));
        core.slice_mut(s![0, .., 0]).assign(&vplus);
        return Ok(TTVector::from_cores_unchecked(vec![core], None));
    }
    let mut cores = Vec::with_capacity(n);
    let mut first = Array3::zeros((1, 4, 2));
    first.slice_mut(s![0, .., 0]).assign(local(0));
    first.slice_mut(s![0, .., 1]).assign(&vid);
    cores.push(first);
    for site in 1..n - 1 {
        let mut mid = Array3::zeros((2, 4, 2));
        mid.slice_mut(s![0, .., 0]).assign(&vid);
        mid.slice_mut(s![1, .., 0]).assign(local(site));
        mid.slice_mut(s![1, .., 1]).assign(&vid);
        cores.push(mid);
    }
    let mut last = Array3::zeros((2, 4, 1));
    last.slice_mut(s![0, .., 0]).assign(&vid);
    last.slice_mut(s![1, .., 0]).assign(local(n - 1));
    cores.push(last);
    Ok(TTVector::from_cores_unchecked(cores, None))
}

/// Two-band TT for the sum of the same local operator over every site.
fn two_band_operator(local: &Array2<C64>, n: usize) -> TTOperator {
    let id = identity2();
    let zero = Array2::<C64>::zeros((2, 2));
    let mut cores = Vec::with_capacity(n);
    cores.push(op_core(&[&[local, &id]]));
    for _ in 1..n - 1 {
        cores.push(op_core(&[&[&id, &zero], &[local, &id]]));
    }
    cores.push(op_core(&[&[&id], &[local]]));
    TTOperator::from_cores_unchecked(cores, None)
}

/// Assemble an operator core from a (left rank) x (right rank) grid of 2x2
/// blocks.
fn op_core(blocks: &[&[&Array2<C64>]]) -> Array4<C64> {
    let rl = blocks.len();
    let rr = blocks[0].len();
    let mut core = Array4::zeros((rl, 2, 2, rr));
    for (a, row) in blocks.iter().enumerate() {
        assert_eq!(row.len(), rr, "ragged block grid");
        for (b, mat) in row.iter().enumerate() {
            core.slice_mut(s![a, .., .., b]).assign(*mat);
        }
    }
    core
}
