mod common;

use common::{gaussian, hermitian, low_rank, rng};
use num_complex::Complex64;
use proptest::prelude::*;
use qgame_core::matkit::{eigh, kron, schmidt, svd};
use qgame_core::Matrix;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eigh_reconstructs(seed in any::<u64>(), n in 1usize..=64) {
        let h = hermitian(&mut rng(seed), n);
        let e = eigh(&h).unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(&h) <= 1e-9 * n as f64);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let gram = e.vectors.adjoint().matmul(&e.vectors).unwrap();
        prop_assert!(gram.max_abs_diff(&Matrix::identity(n)) <= 1e-9 * n as f64);
    }

    #[test]
    fn svd_reconstructs(seed in any::<u64>(), rows in 1usize..=64, cols in 1usize..=64, r in 0usize..=8) {
        let mut g = rng(seed);
        // r = 0 draws a full-rank matrix, otherwise rank min(r, rows, cols)
        let m = if r == 0 {
            gaussian(&mut g, rows, cols)
        } else {
            low_rank(&mut g, rows, cols, r.min(rows).min(cols))
        };
        let s = svd(&m);
        let dim = rows.max(cols) as f64;
        prop_assert!(s.reconstruct().max_abs_diff(&m) <= 1e-9 * dim * m.max_abs().max(1.0));
        prop_assert_eq!((s.u.rows(), s.u.cols(), s.v.rows(), s.v.cols()), (rows, rows, cols, cols));
        prop_assert!(s.u.adjoint().matmul(&s.u).unwrap().max_abs_diff(&Matrix::identity(rows)) <= 1e-9 * dim);
        prop_assert!(s.v.adjoint().matmul(&s.v).unwrap().max_abs_diff(&Matrix::identity(cols)) <= 1e-9 * dim);
        prop_assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.singular_values.iter().all(|&x| x >= 0.0));
    }
}

proptest! {
    #[test]
    fn kron_rank_is_multiplicative(
        seed in any::<u64>(),
        (ra, ma, na) in (1usize..=4).prop_flat_map(|r| (Just(r), r..=6, r..=6)),
        (rb, mb, nb) in (1usize..=4).prop_flat_map(|r| (Just(r), r..=6, r..=6)),
    ) {
        let mut g = rng(seed);
        let a = low_rank(&mut g, ma, na, ra);
        let b = low_rank(&mut g, mb, nb, rb);
        prop_assert_eq!(a.rank(), ra);
        prop_assert_eq!(b.rank(), rb);
        prop_assert_eq!(kron(&a, &b).unwrap().rank(), ra * rb);
    }

    #[test]
    fn schmidt_count_is_reshape_rank(
        seed in any::<u64>(),
        (r, da, db) in (1usize..=5).prop_flat_map(|r| (Just(r), r..=8, r..=8)),
    ) {
        let m = low_rank(&mut rng(seed), da, db, r);
        let norm = m.frobenius_norm();
        let v: Vec<Complex64> = m.data().iter().map(|z| z / norm).collect();
        let s = schmidt(&v, da, db).unwrap();
        prop_assert_eq!(s.rank(), Matrix::from_vec(da, db, v.clone()).unwrap().rank());
        prop_assert_eq!(s.rank(), r);
        let back = s.reconstruct();
        let err = back.iter().zip(&v).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-10);
    }
}
