mod common;

use common::{exhaustive_mst_weight, kruskal_weight, oracle_knn_edges, random_cloud};
use crossedge::geom::{
    brute_neighbour_lists, emst, knn_graph, knn_graphs_nested, mst_and_knn_graphs, neighbour_lists,
    DirectedGeometricGraph, Metric, PointCloud,
};
use crossedge::sampling::{sample_poisson_torus, SeededRng};

fn edge_pairs(g: &DirectedGeometricGraph) -> Vec<(usize, usize)> {
    let mut v: Vec<_> = g.edges().iter().map(|e| (e.src, e.dst)).collect();
    v.sort();
    v
}

fn connected(g: &DirectedGeometricGraph) -> bool {
    let n = g.n_vertices();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for w in g.out_neighbours(v) {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[test]
fn knn_matches_sorting_oracle() {
    for (i, &(n, d)) in [(30, 1), (120, 2), (200, 3), (75, 5), (160, 12)].iter().enumerate() {
        let cloud = random_cloud(n, d, 100 + i as u64);
        for k in 1..=4 {
            let g = knn_graph(&cloud, k).unwrap();
            assert_eq!(edge_pairs(&g), oracle_knn_edges(&cloud, k), "n={n} d={d} k={k}");
        }
    }
}

#[test]
fn knn_ties_prefer_smaller_indices() {
    // a square lattice is full of equal distances
    let rows: Vec<[f64; 2]> = (0..36).map(|i| [(i % 6) as f64, (i / 6) as f64]).collect();
    let cloud = PointCloud::from_rows(2, &rows).unwrap();
    for k in 1..=5 {
        assert_eq!(edge_pairs(&knn_graph(&cloud, k).unwrap()), oracle_knn_edges(&cloud, k));
    }
}

#[test]
fn knn_graph_invariants() {
    let cloud = random_cloud(150, 3, 7);
    let g = knn_graph(&cloud, 3).unwrap();
    for v in 0..150 {
        assert_eq!(g.out_degree(v), 3);
        assert!(!g.has_edge(v, v));
    }
    for e in g.edges() {
        let exact: f64 = cloud
            .point(e.src)
            .iter()
            .zip(cloud.point(e.dst))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!((e.length - exact).abs() < 1e-12);
    }
    let pairs = edge_pairs(&g);
    let mut dedup = pairs.clone();
    dedup.dedup();
    assert_eq!(pairs, dedup);
}

#[test]
fn mst_matches_exhaustive_enumeration() {
    for seed in 0..5 {
        let cloud = random_cloud(6, 2, seed);
        let w = emst(&cloud).unwrap().total_length() / 2.0;
        assert!((w - exhaustive_mst_weight(&cloud)).abs() < 1e-12, "seed {seed}");
    }
}

#[test]
fn mst_matches_kruskal_and_is_a_symmetric_tree() {
    for (i, &(n, d)) in [(50, 1), (200, 2), (180, 3), (90, 5)].iter().enumerate() {
        let cloud = random_cloud(n, d, 40 + i as u64);
        let g = emst(&cloud).unwrap();
        assert_eq!(g.edge_count(), 2 * (n - 1));
        for e in g.edges() {
            assert!(g.has_edge(e.dst, e.src));
        }
        assert!(connected(&g));
        assert!((g.total_length() / 2.0 - kruskal_weight(&cloud)).abs() < 1e-9);
    }
}

#[test]
fn torus_search_matches_brute_force() {
    for d in 1..=4 {
        let side = 300f64.powf(1.0 / d as f64);
        let cloud = sample_poisson_torus(1.0, side, d, &SeededRng::new(d as u64)).unwrap();
        let metric = Metric::Torus { side };
        assert_eq!(neighbour_lists(&cloud, 3, metric), brute_neighbour_lists(&cloud, 3, metric), "d={d}");
    }
}

#[test]
fn combined_construction_matches_separate() {
    for &d in &[3usize, 14] {
        let cloud = random_cloud(300, d, 9);
        let (mst, knn) = mst_and_knn_graphs(&cloud, 3, Metric::Euclidean).unwrap();
        assert_eq!(mst, emst(&cloud).unwrap());
        assert_eq!(knn, knn_graphs_nested(&cloud, 3, Metric::Euclidean).unwrap());
    }
}

#[test]
fn errors() {
    let cloud = random_cloud(3, 2, 0);
    assert!(knn_graph(&cloud, 3).is_err());
    assert!(knn_graph(&cloud, 0).is_err());
    let bad = PointCloud::from_rows(1, &[[0.0], [f64::INFINITY], [1.0]]).unwrap();
    assert!(knn_graph(&bad, 1).is_err());
    assert!(emst(&bad).is_err());
    assert!(emst(&random_cloud(1, 2, 0)).is_err());
}
