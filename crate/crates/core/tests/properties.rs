use colsubset_core::criteria::{relative_volume, volume};
use colsubset_core::matrix::{partitioned_pinv, pseudo_inverse, svd};
use colsubset_core::selectors::{
    select_exact, select_exact_with, select_greedy_frobenius, select_local_swap_volume,
};
use colsubset_core::x3c::{generate_true, reduce, solve_exact, X3CInstance};
use colsubset_core::{CriterionKind, CriterionSpec, DenseMatrix, ExactOptions, SchattenP};
use proptest::prelude::*;

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        proptest::collection::vec(-4.0f64..4.0, r * c)
            .prop_map(move |data| DenseMatrix::new(r, c, data).unwrap())
    })
}

fn subset_of(n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn submatrix_singular_values_interlace(
        (a, idx) in matrix(7, 6)
            .prop_filter("tall", |a| a.rows() >= a.cols())
            .prop_flat_map(|a| { let n = a.cols(); (Just(a), subset_of(n)) })
    ) {
        let sa = svd(&a).unwrap();
        let sc = svd(&a.select_columns(&idx)).unwrap();
        let k = idx.len();
        let base = a.cols() - k;
        let tol = 1e-10 * sa.largest().max(1.0);
        for j in 1..=k {
            prop_assert!(sc.sigma(j) <= sa.sigma(j) + tol);
            prop_assert!(sa.sigma(base + j) <= sc.sigma(j) + tol);
        }
    }

    #[test]
    fn greedy_frobenius_is_exact((a, k) in matrix(5, 10).prop_flat_map(|a| {
        let n = a.cols();
        (Just(a), 1..=n.min(5))
    })) {
        let fro = CriterionSpec::with_p(CriterionKind::Norm, SchattenP::Finite(2.0));
        let g = select_greedy_frobenius(&a, k).unwrap();
        let e = select_exact(&a, k, &fro).unwrap();
        prop_assert!((g.value.value - e.value.value).abs() <= 1e-12);
    }

    #[test]
    fn exact_selection_ignores_thread_count(a in matrix(5, 11), threads in 2usize..6) {
        let k = a.cols().min(3);
        let spec = CriterionSpec::simple(CriterionKind::Volume);
        let one = select_exact(&a, k, &spec).unwrap();
        let many = select_exact_with(&a, k, &spec, &ExactOptions::with_threads(threads)).unwrap();
        prop_assert_eq!(one.subset, many.subset);
        prop_assert_eq!(one.value.value.to_bits(), many.value.value.to_bits());
    }

    #[test]
    fn local_swap_never_beats_exact(a in matrix(6, 9), seed in any::<u64>()) {
        let k = a.cols().min(a.rows()).min(3);
        prop_assume!(svd(&a).unwrap().numerical_rank >= k);
        let local = select_local_swap_volume(&a, k, seed, 50).unwrap();
        let exact = select_exact(&a, k, &CriterionSpec::simple(CriterionKind::Volume)).unwrap();
        prop_assert!(local.value.value <= exact.value.value * (1.0 + 1e-12));
        prop_assert!((volume(&local.subset.extract(&a)).unwrap() - local.value.value).abs() <= 1e-12 * exact.value.value.max(1.0));
    }

    #[test]
    fn partitioned_pinv_reconstructs((c, split) in matrix(7, 5)
        .prop_filter("full column rank, tall", |c| {
            c.cols() >= 2 && c.rows() >= c.cols()
                && { let s = svd(c).unwrap(); s.numerical_rank == c.cols() && s.largest() / s.sigma(c.cols()) < 1e6 }
        })
        .prop_flat_map(|c| { let n = c.cols(); (Just(c), 1..n) }))
    {
        let left: Vec<usize> = (0..split).collect();
        let right: Vec<usize> = (split..c.cols()).collect();
        let pp = partitioned_pinv(&c.select_columns(&left), &c.select_columns(&right)).unwrap();
        let direct = pseudo_inverse(&c, None).unwrap();
        let gap = pp.stacked().sub(&direct).unwrap().max_abs();
        prop_assert!(gap <= 1e-9 * direct.max_abs().max(1.0));
    }

    #[test]
    fn relative_volume_lies_in_unit_interval(a in matrix(6, 4)) {
        if let Ok(r) = relative_volume(&a) {
            prop_assert!(r > 0.0 && r <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn planted_instances_round_trip_and_stay_solvable(m in 1usize..5, extra in 0usize..6, seed in any::<u64>()) {
        let extra = if m == 1 { 0 } else { extra };
        let inst = generate_true(m, extra, seed).unwrap();
        let back: X3CInstance = inst.to_string().parse().unwrap();
        prop_assert_eq!(&back, &inst);
        let cover = solve_exact(&inst).unwrap();
        prop_assert!(inst.is_cover(&cover));
        // The cover's columns are orthonormal.
        let q = reduce(&inst).matrix.select_columns(&cover);
        prop_assert!(q.orthonormality_defect() <= 1e-15);
    }
}
