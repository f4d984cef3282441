mod util;

use ndarray::prelude::*;
use proptest::prelude::*;
use tt_core::{C64, TTOperator, TTVector, TruncationPolicy};
use util::*;

fn modes_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 2..=5)
}

fn vec_strategy() -> impl Strategy<Value = TTVector> {
    (modes_strategy(), 1usize..=4, any::<u64>())
        .prop_map(|(modes, r, seed)| TTVector::random(&modes, r, seed))
}

fn pair_strategy() -> impl Strategy<Value = (TTVector, TTVector)> {
    (modes_strategy(), 1usize..=4, 1usize..=4, any::<u64>(), any::<u64>()).prop_map(
        |(modes, ra, rb, sa, sb)| {
            (
                TTVector::random(&modes, ra, sa),
                TTVector::random(&modes, rb, sb),
            )
        },
    )
}

fn dense_norm(a: &Array1<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gauge_moves_leave_the_tensor_invariant(t in vec_strategy(), c1 in 0usize..5, c2 in 0usize..5) {
        let n = t.n_sites();
        let c1 = c1 % n;
        let c2 = c2 % n;
        let reference = naive_vec_dense(&t);
        let scale = dense_norm(&reference).max(1e-300);
        let a = t.orthogonalize(c1);
        a.validate().unwrap();
        let b = a.orthogonalize(c2);
        b.validate().unwrap();
        let da = a.to_dense().unwrap();
        let db = b.to_dense().unwrap();
        prop_assert!(dense_norm(&(&da - &reference)) / scale <= 1e-12);
        prop_assert!(dense_norm(&(&db - &reference)) / scale <= 1e-12);
    }

    #[test]
    fn rounding_error_stays_within_the_relative_budget(
        t in vec_strategy(),
        tol_pick in 0usize..3,
    ) {
        let tol = [1e-2, 1e-6, 1e-12][tol_pick];
        let want = t.to_dense().unwrap();
        let norm = dense_norm(&want);
        prop_assume!(norm > 1e-12);
        let (r, report) = t.round(&TruncationPolicy::new(tol));
        r.validate().unwrap();
        let got = r.to_dense().unwrap();
        let err = dense_norm(&(&got - &want));
        prop_assert!(err <= tol * norm * 1.0001 + 1e-13 * norm);
        // the report's discarded mass is the exact truncation error for TT-SVD
        prop_assert!(err <= report.discarded_abs * 1.0001 + 1e-12 * norm);
        prop_assert!(report.discarded_abs <= err * 1.0001 + 1e-12 * norm);
        prop_assert!((report.norm_before - norm).abs() <= 1e-10 * norm);
    }

    #[test]
    fn add_commutes_with_dense_reconstruction((a, b) in pair_strategy()) {
        let s = a.add(&b).unwrap();
        s.validate().unwrap();
        let got = s.to_dense().unwrap();
        let want = a.to_dense().unwrap() + b.to_dense().unwrap();
        let scale = dense_norm(&want).max(1.0);
        prop_assert!(dense_norm(&(&got - &want)) / scale <= 1e-12);
    }

    #[test]
    fn scale_commutes_with_dense_reconstruction(t in vec_strategy(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let alpha = c(re, im);
        let got = t.scale(alpha).to_dense().unwrap();
        let want = t.to_dense().unwrap().mapv(|z| z * alpha);
        let scale = dense_norm(&want).max(1.0);
        prop_assert!(dense_norm(&(&got - &want)) / scale <= 1e-12);
    }

    #[test]
    fn inner_product_matches_dense_contraction((a, b) in pair_strategy()) {
        let got = a.inner(&b).unwrap();
        let da = a.to_dense().unwrap();
        let db = b.to_dense().unwrap();
        let want: C64 = da.iter().zip(db.iter()).map(|(x, y)| x.conj() * y).sum();
        let scale = dense_norm(&da) * dense_norm(&db);
        prop_assert!((got - want).norm() <= 1e-12 * scale.max(1e-300));
        // norm agrees with the dense 2-norm
        prop_assert!((a.norm() - dense_norm(&da)).abs() <= 1e-12 * dense_norm(&da).max(1.0));
    }

    #[test]
    fn apply_commutes_with_dense_matvec(
        modes in modes_strategy(),
        ra in 1usize..=3,
        rx in 1usize..=3,
        sa in any::<u64>(),
        sx in any::<u64>(),
    ) {
        let op = TTOperator::random(&modes, ra, sa);
        let x = TTVector::random(&modes, rx, sx);
        let y = op.apply(&x).unwrap();
        y.validate().unwrap();
        let got = y.to_dense().unwrap();
        let want = naive_op_dense(&op).dot(&x.to_dense().unwrap());
        let scale = dense_norm(&want).max(1.0);
        prop_assert!(dense_norm(&(&got - &want)) / scale <= 1e-11);
    }

    #[test]
    fn compose_commutes_with_dense_matmul(
        modes in modes_strategy(),
        ra in 1usize..=3,
        rb in 1usize..=3,
        sa in any::<u64>(),
        sb in any::<u64>(),
    ) {
        let a = TTOperator::random(&modes, ra, sa);
        let b = TTOperator::random(&modes, rb, sb);
        let m = a.compose(&b).unwrap();
        m.validate().unwrap();
        let got = m.to_dense().unwrap();
        let want = naive_op_dense(&a).dot(&naive_op_dense(&b));
        let scale = want.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
        let err = (&got - &want).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err / scale <= 1e-11);
    }

    #[test]
    fn dense_round_trip_preserves_the_vector(t in vec_strategy()) {
        let want = t.to_dense().unwrap();
        prop_assume!(dense_norm(&want) > 1e-12);
        let (back, _) = TTVector::from_dense(want.view(), &t.mode_sizes(), &TruncationPolicy::new(1e-13)).unwrap();
        back.validate().unwrap();
        let got = back.to_dense().unwrap();
        prop_assert!(dense_norm(&(&got - &want)) / dense_norm(&want) <= 1e-11);
        // compression never exceeds the dimension-bound ranks
        let n = t.n_sites();
        let modes = t.mode_sizes();
        for bond in 0..=n {
            let left: usize = modes[..bond].iter().product();
            let right: usize = modes[bond..].iter().product();
            prop_assert!(back.ranks()[bond] <= left.min(right));
        }
    }

    #[test]
    fn operator_apply_then_inner_is_a_sesquilinear_form(
        modes in modes_strategy(),
        seeds in (any::<u64>(), any::<u64>(), any::<u64>()),
    ) {
        let op = TTOperator::random(&modes, 2, seeds.0);
        let x = TTVector::random(&modes, 2, seeds.1);
        let y = TTVector::random(&modes, 2, seeds.2);
        let lhs = y.inner(&op.apply(&x).unwrap()).unwrap();
        let dy = y.to_dense().unwrap();
        let dx = x.to_dense().unwrap();
        let want: C64 = dy
            .iter()
            .zip(naive_op_dense(&op).dot(&dx).iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let scale = dense_norm(&dy) * dense_norm(&dx) * op.norm();
        prop_assert!((lhs - want).norm() <= 1e-11 * scale.max(1e-300));
    }
}
