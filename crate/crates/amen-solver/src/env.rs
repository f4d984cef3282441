//! Environment tensors and local contractions shared by the solvers.
//!
//! An operator environment at bond n carries (bra_rank, op_rank, ket_rank);
//! the bra train enters conjugated. Right-hand-side environments carry
//! (bra_rank, rhs_rank) on the left and (rhs_rank, bra_rank) on the right.
//! The same helpers serve both the iterate-iterate environments and the
//! mixed sketch-iterate ones, since only the bra train differs.

use ndarray::prelude::*;
use tt_core::C64;

/// (r_left * m, r_right) view; cores stay row-major throughout the sweeps.
pub(crate) fn lu(c: &Array3<C64>) -> ArrayView2<'_, C64> {
    let (rl, m, rr) = c.dim();
    assert!(c.is_standard_layout(), "sweep cores stay row-major");
    c.view().into_shape((rl * m, rr)).expect("contiguous core")
}

/// (r_left, m * r_right) view; same layout contract as [`lu`].
pub(crate) fn ru(c: &Array3<C64>) -> ArrayView2<'_, C64> {
    let (rl, m, rr) = c.dim();
    assert!(c.is_standard_layout(), "sweep cores stay row-major");
    c.view().into_shape((rl, m * rr)).expect("contiguous core")
}

pub(crate) fn adjoint(a: ArrayView2<C64>) -> Array2<C64> {
    Array2::from_shape_fn((a.ncols(), a.nrows()), |(i, j)| a[[j, i]].conj())
}

/// Permute then refold an owned tensor; the copy restores row-major layout
/// so the following reshape is a plain reinterpretation.
macro_rules! refold {
    ($arr:expr, $mid:expr, $perm:expr, $out:expr) => {
        $arr.into_shape($mid)
            .expect("refold split")
            .permuted_axes($perm)
            .as_standard_layout()
            .to_owned()
            .into_shape($out)
            .expect("refold fold")
    };
}

/// Advance an operator environment one site to the right.
pub(crate) fn op_left(
    prev: &Array3<C64>,
    bra: &Array3<C64>,
    a: &Array4<C64>,
    ket: &Array3<C64>,
) -> Array3<C64> {
    let (bl, al, kl) = prev.dim();
    let (_, mo, mi, ar) = a.dim();
    let br = bra.dim().2;
    let kr = ket.dim().2;
    let pm = prev
        .view()
        .into_shape((bl * al, kl))
        .expect("contiguous env");
    let t1 = pm.dot(&ru(ket));
    let t1 = refold!(t1, (bl, al, mi, kr), [0, 3, 1, 2], (bl * kr, al * mi));
    let ap = a
        .view()
        .permuted_axes([0, 2, 1, 3])
        .as_standard_layout()
        .to_owned()
        .into_shape((al * mi, mo * ar))
        .expect("op fold");
    let t2 = t1.dot(&ap);
    let t2 = refold!(t2, (bl, kr, mo, ar), [1, 3, 0, 2], (kr * ar, bl * mo));
    let bm = lu(bra).mapv(|z| z.conj());
    let t3 = t2.dot(&bm);
    refold!(t3, (kr, ar, br), [2, 1, 0], (br, ar, kr))
}

/// Advance an operator environment one site to the left.
pub(crate) fn op_right(
    prev: &Array3<C64>,
    bra: &Array3<C64>,
    a: &Array4<C64>,
    ket: &Array3<C64>,
) -> Array3<C64> {
    let (br, ar, kr) = prev.dim();
    let (al, mo, mi, _) = a.dim();
    let bl = bra.dim().0;
    let kl = ket.dim().0;
    let pm = prev
        .view()
        .permuted_axes([2, 0, 1])
        .as_standard_layout()
        .to_owned()
        .into_shape((kr, br * ar))
        .expect("env fold");
    let t1 = lu(ket).dot(&pm);
    let t1 = refold!(t1, (kl, mi, br, ar), [0, 2, 1, 3], (kl * br, mi * ar));
    let ap = a
        .view()
        .permuted_axes([2, 3, 0, 1])
        .as_standard_layout()
        .to_owned()
        .into_shape((mi * ar, al * mo))
        .expect("op fold");
    let t2 = t1.dot(&ap);
    let t2 = refold!(t2, (kl, br, al, mo), [0, 2, 1, 3], (kl * al, br * mo));
    let bm = bra
        .view()
        .permuted_axes([2, 1, 0])
        .as_standard_layout()
        .to_owned()
        .into_shape((br * mo, bl))
        .expect("bra fold")
        .mapv(|z| z.conj());
    let t3 = t2.dot(&bm);
    refold!(t3, (kl, al, bl), [2, 1, 0], (bl, al, kl))
}

/// Advance a right-hand-side environment one site to the right.
pub(crate) fn vec_left(prev: &Array2<C64>, bra: &Array3<C64>, v: &Array3<C64>) -> Array2<C64> {
    let (bl, m, _) = bra.dim();
    let cr = v.dim().2;
    let t1 = prev.dot(&ru(v));
    let t1 = t1.into_shape((bl * m, cr)).expect("owned product");
    adjoint(lu(bra)).dot(&t1)
}

/// Advance a right-hand-side environment one site to the left.
pub(crate) fn vec_right(prev: &Array2<C64>, bra: &Array3<C64>, v: &Array3<C64>) -> Array2<C64> {
    let (cl, m, _) = v.dim();
    let br = bra.dim().2;
    let t1 = lu(v).dot(prev);
    let t1 = t1.into_shape((cl, m * br)).expect("owned product");
    t1.dot(&adjoint(ru(bra)))
}

/// Contract left env, operator core, right env against a ket core: the
/// local operator action, and with mixed environments the building block of
/// the sketch and enrichment updates.
pub(crate) fn chain_apply(
    le: &Array3<C64>,
    a: &Array4<C64>,
    re: &Array3<C64>,
    ket: &Array3<C64>,
) -> Array3<C64> {
    let (bl, al, kl) = le.dim();
    let (_, mo, mi, ar) = a.dim();
    let (br, _, kr) = re.dim();
    debug_assert_eq!(ket.dim(), (kl, mi, kr));
    let lm = le.view().into_shape((bl * al, kl)).expect("contiguous env");
    let w1 = lm.dot(&ru(ket));
    let w1 = refold!(w1, (bl, al, mi, kr), [0, 3, 1, 2], (bl * kr, al * mi));
    let ap = a
        .view()
        .permuted_axes([0, 2, 1, 3])
        .as_standard_layout()
        .to_owned()
        .into_shape((al * mi, mo * ar))
        .expect("op fold");
    let w2 = w1.dot(&ap);
    let w2 = refold!(w2, (bl, kr, mo, ar), [0, 2, 3, 1], (bl * mo, ar * kr));
    let rm = re
        .view()
        .permuted_axes([1, 2, 0])
        .as_standard_layout()
        .to_owned()
        .into_shape((ar * kr, br))
        .expect("env fold");
    let w3 = w2.dot(&rm);
    w3.into_shape((bl, mo, br)).expect("owned product")
}

/// Dense local matrix ((bl*mo*br) x (kl*mi*kr)) of the projected operator.
pub(crate) fn dense_local(le: &Array3<C64>, a: &Array4<C64>, re: &Array3<C64>) -> Array2<C64> {
    let (bl, al, kl) = le.dim();
    let (_, mo, mi, ar) = a.dim();
    let (br, _, kr) = re.dim();
    let lam = le
        .view()
        .permuted_axes([0, 2, 1])
        .as_standard_layout()
        .to_owned()
        .into_shape((bl * kl, al))
        .expect("env fold");
    let am = a
        .view()
        .into_shape((al, mo * mi * ar))
        .expect("contiguous op");
    let t1 = lam.dot(&am);
    let t1 = t1
        .into_shape((bl * kl * mo * mi, ar))
        .expect("owned product");
    let ram = re
        .view()
        .permuted_axes([1, 0, 2])
        .as_standard_layout()
        .to_owned()
        .into_shape((ar, br * kr))
        .expect("env fold");
    let t2 = t1.dot(&ram);
    refold!(
        t2,
        (bl, kl, mo, mi, br, kr),
        [0, 2, 4, 1, 3, 5],
        (bl * mo * br, kl * mi * kr)
    )
}

/// Projected right-hand-side block (bra_l * m, cols); with the iterate's own
/// right environment this is the local rhs, with the sketch's it feeds the
/// sketch update and the enrichment.
pub(crate) fn rhs_block(lv: &Array2<C64>, v: &Array3<C64>, rv: &Array2<C64>) -> Array2<C64> {
    let (_, m, cr) = v.dim();
    let bl = lv.nrows();
    let t1 = lv.dot(&ru(v));
    let t1 = t1.into_shape((bl * m, cr)).expect("owned product");
    t1.dot(rv)
}
