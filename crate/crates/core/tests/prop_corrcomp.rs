mod common;

use common::{gaussian, max_abs_diff_rows, rng};
use proptest::prelude::*;
use qgame_core::corrcomp::{
    ceil_log2, classical_protocol_from, euclidean_instance, mutual_information, nn_rank_lower, normal_form,
    qcorr_ub_protocol, rank_lb_qcorr, size_of, CorrelationMatrix,
};
use qgame_core::reproduce::random_factorization;
use qgame_core::Matrix;
use rand::Rng;

fn from_q(q: &Matrix) -> CorrelationMatrix {
    let rows: Vec<Vec<f64>> = (0..q.rows())
        .map(|x| (0..q.cols()).map(|y| q[(x, y)].norm_sqr()).collect())
        .collect();
    CorrelationMatrix::normalized(&rows).unwrap()
}

fn execute_rows(d: &qgame_core::JointDistribution) -> Vec<Vec<f64>> {
    d.to_matrix().unwrap()
}

proptest! {
    #[test]
    fn quantum_protocols_reproduce_targets(
        seed in any::<u64>(),
        (r, m, n) in (1usize..=4).prop_flat_map(|r| (Just(r), r..=6, r..=6)),
    ) {
        let mut g = rng(seed);
        let q = gaussian(&mut g, m, r).matmul(&gaussian(&mut g, r, n)).unwrap();
        let p = from_q(&q);
        let proto = qcorr_ub_protocol(&q).unwrap();
        prop_assert!(p.max_abs_diff(&proto.simulate()) <= 1e-10);
        prop_assert_eq!(proto.rank(), r);
        prop_assert_eq!(proto.seed_qubits(), ceil_log2(r));
        let out = proto.seeded().unwrap().execute().unwrap();
        prop_assert!(p.max_abs_diff(&execute_rows(&out)) <= 1e-10);
        // sandwich: ¼ log₂ rank P ≤ seed qubits
        prop_assert!(rank_lb_qcorr(&p) <= f64::from(proto.seed_qubits()) + 1e-12);
        prop_assert!(mutual_information(&p) / 2.0 <= size_of(&p) + 1e-12);
    }

    #[test]
    fn classical_protocols_reproduce_targets(
        seed in any::<u64>(),
        m in 2usize..=6,
        n in 2usize..=6,
        r in 1usize..=6,
    ) {
        let mut g = rng(seed);
        let (p, f) = random_factorization(&mut g, m, n, r).unwrap();
        prop_assert!(f.is_certified());
        let proto = classical_protocol_from(&f).unwrap();
        prop_assert!(p.max_abs_diff(&proto.distribution()) <= 1e-10);
        let out = proto.seeded().unwrap().execute().unwrap();
        prop_assert!(p.max_abs_diff(&execute_rows(&out)) <= 1e-10);
        // sandwich: any certified inner dimension bounds the lower bound from above
        let lower = nn_rank_lower(&p);
        prop_assert!(lower.value <= f.inner_dim());
        prop_assert!(ceil_log2(lower.value) <= proto.seed_bits());
        prop_assert!(lower.rank <= lower.value);
        prop_assert!(mutual_information(&p) / 2.0 <= size_of(&p) + 1e-12);
    }

    #[test]
    fn euclidean_instances_have_rank_two_and_zero_diagonal(
        cs in prop::collection::btree_set(1u32..1000, 2..=12),
    ) {
        let cs: Vec<f64> = cs.into_iter().map(f64::from).collect();
        let e = euclidean_instance(&cs).unwrap();
        prop_assert_eq!(e.q_matrix().rank(), 2);
        for x in 0..cs.len() {
            prop_assert_eq!(e.p.get(x, x), 0.0);
        }
        prop_assert!(mutual_information(&e.p) / 2.0 <= size_of(&e.p) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn normal_form_keeps_product_and_makes_d_stochastic(
        seed in any::<u64>(),
        m in 1usize..=8,
        n in 1usize..=8,
        r in 1usize..=6,
        zero_col in any::<bool>(),
    ) {
        let mut g = rng(seed);
        let mut c: Vec<Vec<f64>> = (0..m).map(|_| (0..r).map(|_| g.random::<f64>()).collect()).collect();
        if zero_col && r > 1 {
            let k = g.random_range(0..r);
            c.iter_mut().for_each(|row| row[k] = 0.0);
        }
        let mut d: Vec<Vec<f64>> = (0..r).map(|_| (0..n).map(|_| g.random::<f64>() + 1e-3).collect()).collect();
        // scale D so that CD is column-stochastic
        let prod = |c: &[Vec<f64>], d: &[Vec<f64>]| -> Vec<Vec<f64>> {
            c.iter()
                .map(|row| (0..n).map(|y| row.iter().zip(d).map(|(a, dr)| a * dr[y]).sum()).collect())
                .collect()
        };
        let p0 = prod(&c, &d);
        for y in 0..n {
            let s: f64 = p0.iter().map(|row| row[y]).sum();
            d.iter_mut().for_each(|row| row[y] /= s);
        }
        let before = prod(&c, &d);
        let (c2, d2) = normal_form(c, d);
        let after = prod(&c2, &d2);
        prop_assert!(max_abs_diff_rows(&before, &after) <= 1e-14);
        for y in 0..n {
            let s: f64 = d2.iter().map(|row| row[y]).sum();
            prop_assert!((s - 1.0).abs() <= 1e-12, "column {} of D sums to {}", y, s);
        }
        for k in 0..r {
            let s: f64 = c2.iter().map(|row| row[k]).sum();
            prop_assert!(s == 0.0 || (s - 1.0).abs() <= 1e-12);
        }
    }
}
