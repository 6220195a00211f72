use std::sync::OnceLock;

use crossedge::constants::{estimate_constants, ConstantsConfig, FunctionalConstants};
use crossedge::geom::{build_graph, Metric, PointCloud};
use crossedge::stats::{cross_count_labels, sigma1_null, sigma1_null_general};
use crossedge::Functional;
use proptest::prelude::*;

fn cloud_and_labels(d: usize) -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
    (8usize..60).prop_flat_map(move |n| {
        (prop::collection::vec(-10.0f64..10.0, n * d), prop::collection::vec(1u8..=2, n))
    })
}

fn functional() -> impl Strategy<Value = Functional> {
    prop_oneof![
        Just(Functional::Knn(1)),
        Just(Functional::Knn(2)),
        Just(Functional::Knn(3)),
        Just(Functional::Mst),
    ]
}

fn t_of(coords: Vec<f64>, d: usize, labels: &[u8], kind: Functional) -> usize {
    let cloud = PointCloud::from_flat(d, coords).unwrap();
    let g = build_graph(&cloud, kind, Metric::Euclidean).unwrap();
    cross_count_labels(&g, labels)
}

proptest! {
    #[test]
    fn statistic_is_invariant_under_relabelling_points(
        (coords, labels) in cloud_and_labels(2),
        kind in functional(),
        seed in any::<u64>(),
    ) {
        let n = labels.len();
        let mut perm: Vec<usize> = (0..n).collect();
        // Fisher-Yates driven by a splitmix sequence
        let mut s = seed;
        for i in (1..n).rev() {
            s = crossedge::sampling::splitmix64(s);
            perm.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let cloud = PointCloud::from_flat(2, coords.clone()).unwrap();
        let permuted = cloud.permuted(&perm);
        let plabels: Vec<u8> = perm.iter().map(|&i| labels[i]).collect();
        prop_assert_eq!(
            t_of(coords, 2, &labels, kind),
            t_of(permuted.as_flat().to_vec(), 2, &plabels, kind)
        );
    }

    #[test]
    fn statistic_is_invariant_under_scaling_and_translation(
        (coords, labels) in cloud_and_labels(3),
        kind in functional(),
        exp in -6i32..6,
        shift in -100.0f64..100.0,
    ) {
        let base = t_of(coords.clone(), 3, &labels, kind);
        let scale = 2f64.powi(exp);
        let scaled: Vec<f64> = coords.iter().map(|x| x * scale).collect();
        prop_assert_eq!(base, t_of(scaled, 3, &labels, kind));
        let moved: Vec<f64> = coords.iter().map(|x| x + shift).collect();
        prop_assert_eq!(base, t_of(moved, 3, &labels, kind));
    }

    #[test]
    fn degrees_balance_and_count_is_bounded(
        (coords, labels) in cloud_and_labels(2),
        kind in functional(),
    ) {
        let n = labels.len();
        let cloud = PointCloud::from_flat(2, coords).unwrap();
        let g = build_graph(&cloud, kind, Metric::Euclidean).unwrap();
        let out: usize = (0..n).map(|v| g.out_degree(v)).sum();
        let inn: usize = (0..n).map(|v| g.in_degree(v)).sum();
        prop_assert_eq!(out, g.edge_count());
        prop_assert_eq!(inn, g.edge_count());
        let t = cross_count_labels(&g, &labels);
        let direct = g.edges().iter().filter(|e| labels[e.src] == 1 && labels[e.dst] == 2).count();
        prop_assert_eq!(t, direct);
        if kind == Functional::Mst {
            let swapped: Vec<u8> = labels.iter().map(|&l| 3 - l).collect();
            prop_assert_eq!(t, cross_count_labels(&g, &swapped));
        }
    }

    #[test]
    fn null_variance_forms_agree(p in 0.01f64..0.99, which in 0usize..2) {
        let c = &estimated()[which];
        let a = sigma1_null(c.kind, c, p).unwrap();
        let b = sigma1_null_general(c, p).unwrap();
        prop_assert!(a.value > 0.0);
        prop_assert!((a.value - b.value).abs() <= 3.0 * b.se + 1e-12, "{:?} vs {:?}", a, b);
    }
}

fn estimated() -> &'static [FunctionalConstants; 2] {
    static CELL: OnceLock<[FunctionalConstants; 2]> = OnceLock::new();
    CELL.get_or_init(|| {
        let est = |kind| estimate_constants(&ConstantsConfig::new(kind, 2, 50, 11)).unwrap();
        [est(Functional::Knn(2)), est(Functional::Mst)]
    })
}
