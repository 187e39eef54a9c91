use proptest::prelude::*;

use disclab::bmo::bmo_discrepancy;
use disclab::discrepancy::{extreme_l2, extreme_l2_haar, star_l2, star_l2_haar};
use disclab::haar::{haar_coefficient, level_sum, DyadicIndex};
use disclab::oracle::exact_haar_coefficient;
use disclab::pointset::{gen_hammersley, gen_random, load_pointset};
use disclab::PointSet;

fn point_set(max_dim: usize, max_n: usize) -> impl Strategy<Value = PointSet> {
    (1..=max_dim, 0..=max_n).prop_flat_map(|(d, n)| {
        prop::collection::vec(prop::collection::vec(0.0..1.0f64, d), n)
            .prop_map(move |rows| PointSet::new(d, rows).unwrap())
    })
}

/// Level vectors in `{-1, 0, …}^d` with order at most 6, and a position.
fn index_for(dim: usize) -> impl Strategy<Value = DyadicIndex> {
    prop::collection::vec((-1i32..=3, any::<u64>()), dim).prop_map(|parts| {
        let levels: Vec<i32> = parts.iter().map(|p| p.0).collect();
        let positions = parts
            .iter()
            .map(|&(j, r)| if j < 0 { 0 } else { r % (1u64 << j) })
            .collect();
        DyadicIndex::new(levels, positions).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip(p in point_set(4, 20)) {
        let back = load_pointset(&p.to_text(), Some(p.dim())).unwrap();
        prop_assert_eq!(back.to_rows(), p.to_rows());
    }

    #[test]
    fn json_round_trip(p in point_set(4, 20)) {
        let back = PointSet::from_json(&p.to_json()).unwrap();
        prop_assert_eq!(back.to_rows(), p.to_rows());
    }

    #[test]
    fn generators_stay_in_the_cube(n in 1usize..200, d in 1usize..8, seed in any::<u64>()) {
        for set in [gen_random(n, d, seed).unwrap(), gen_hammersley(n, d).unwrap()] {
            prop_assert_eq!(set.len(), n);
            for x in set.iter() {
                prop_assert!(x.iter().all(|&c| (0.0..1.0).contains(&c)));
            }
        }
        prop_assert_eq!(gen_random(n, d, seed).unwrap(), gen_random(n, d, seed).unwrap());
    }

    #[test]
    fn coefficients_match_oracle(
        (p, index) in point_set(3, 16).prop_flat_map(|p| {
            let d = p.dim();
            (Just(p), index_for(d))
        })
    ) {
        let fast = haar_coefficient(&p, &index).unwrap().value;
        let exact = exact_haar_coefficient(&p, &index).unwrap();
        prop_assert!((fast - exact).abs() <= 1e-12, "{} vs {}", fast, exact);
    }

    #[test]
    fn permutation_invariance(p in point_set(3, 24), shift in 0usize..24) {
        let mut rows = p.to_rows();
        if !rows.is_empty() {
            let k = shift % rows.len();
            rows.rotate_left(k);
            rows.reverse();
        }
        let q = PointSet::new(p.dim(), rows).unwrap();
        prop_assert!((star_l2(&p).squared - star_l2(&q).squared).abs() <= 1e-14);
        prop_assert!((extreme_l2(&p).squared - extreme_l2(&q).squared).abs() <= 1e-14);
        // occupied-box sums run in sorted box order, so they agree bit for bit
        let levels = vec![2u32; p.dim()];
        prop_assert_eq!(level_sum(&p, &levels).unwrap(), level_sum(&q, &levels).unwrap());
    }

    #[test]
    fn truncation_brackets(p in point_set(3, 24), order in 4u32..12) {
        let closed = extreme_l2(&p).squared;
        let h = extreme_l2_haar(&p, order).unwrap();
        prop_assert!(h.squared <= closed + 1e-15);
        prop_assert!(closed <= h.squared + h.tail_bound.unwrap() + 1e-15);
        let star = star_l2(&p).squared;
        let s = star_l2_haar(&p, order).unwrap();
        prop_assert!(s.squared <= star + 1e-15);
        prop_assert!(star <= s.squared + s.tail_bound.unwrap() + 1e-15);
        prop_assert!(star >= closed - 1e-15);
    }

    #[test]
    fn bmo_at_least_extreme(p in point_set(3, 24), order in 2u32..10) {
        let b = bmo_discrepancy(&p, order, 2.min(order)).unwrap();
        let h = extreme_l2_haar(&p, order).unwrap();
        prop_assert!(b.value >= h.value);
        prop_assert!(b.squared >= b.global_term_squared);
    }
}
