use super::cloud::PointCloud;
use super::graph::{DirectedGeometricGraph, Edge, GraphKind};
use super::kdtree::{KdTree, Neighbours};
use super::metric::Metric;
use super::mst::{emst_with_metric, prim_core, symmetrize};
use crate::error::{invalid_param, Result};

/// Above this dimension the k-d tree stops pruning and an all-pairs scan is
/// faster. Both paths return identical neighbour lists.
const KDTREE_MAX_DIM: usize = 10;

/// Periodic image enumeration costs `3^d` box checks per query.
const TORUS_KDTREE_MAX_DIM: usize = 4;

fn check_k(cloud: &PointCloud, k: usize) -> Result<()> {
    if cloud.len() < 2 {
        return Err(invalid_param(format!("K-NN needs at least 2 points, got {}", cloud.len())));
    }
    if k == 0 || k >= cloud.len() {
        return Err(invalid_param(format!("K must satisfy 1 <= K < n (K = {k}, n = {})", cloud.len())));
    }
    cloud.check_finite()
}

/// Sorted `(squared distance, index)` lists of the `k` nearest distinct
/// points of every point. Ties go to the smaller index.
pub fn neighbour_lists(cloud: &PointCloud, k: usize, metric: Metric) -> Vec<Vec<(f64, usize)>> {
    let n = cloud.len();
    let dim = cloud.dim();
    match metric {
        Metric::Euclidean if uses_kdtree(dim, metric) => {
            let tree = KdTree::new(cloud);
            (0..n).map(|i| tree.knn(cloud.point(i), k, Some(i))).collect()
        }
        Metric::Torus { side } if uses_kdtree(dim, metric) => {
            let tree = KdTree::new(cloud);
            (0..n).map(|i| tree.knn_torus(cloud.point(i), k, Some(i), side)).collect()
        }
        _ => brute_neighbour_lists(cloud, k, metric),
    }
}

/// All-pairs reference implementation of [`neighbour_lists`]. Each pair's
/// distance is computed once and offered to both endpoints.
pub fn brute_neighbour_lists(cloud: &PointCloud, k: usize, metric: Metric) -> Vec<Vec<(f64, usize)>> {
    let n = cloud.len();
    let mut lists: Vec<Neighbours> = (0..n).map(|_| Neighbours::new(k)).collect();
    for i in 0..n {
        let p = cloud.point(i);
        for j in i + 1..n {
            let d2 = metric.dist2(p, cloud.point(j));
            lists[i].offer(d2, j);
            lists[j].offer(d2, i);
        }
    }
    lists.into_iter().map(Neighbours::into_sorted).collect()
}

fn graph_from_lists(n: usize, k: usize, lists: &[Vec<(f64, usize)>]) -> DirectedGeometricGraph {
    let edges = lists
        .iter()
        .enumerate()
        .flat_map(|(src, list)| list.iter().map(move |&(d2, dst)| Edge { src, dst, length: d2.sqrt() }))
        .collect();
    DirectedGeometricGraph::from_edges(n, GraphKind::Knn(k), edges)
}

/// Directed K-nearest-neighbour graph: edge `a -> b` iff `b` is among the
/// `k` nearest distinct points to `a`.
pub fn knn_graph(cloud: &PointCloud, k: usize) -> Result<DirectedGeometricGraph> {
    knn_graph_with_metric(cloud, k, Metric::Euclidean)
}

pub fn knn_graph_with_metric(cloud: &PointCloud, k: usize, metric: Metric) -> Result<DirectedGeometricGraph> {
    check_k(cloud, k)?;
    let lists = neighbour_lists(cloud, k, metric);
    Ok(graph_from_lists(cloud.len(), k, &lists))
}

pub fn knn_graph_brute(cloud: &PointCloud, k: usize) -> Result<DirectedGeometricGraph> {
    check_k(cloud, k)?;
    let lists = brute_neighbour_lists(cloud, k, Metric::Euclidean);
    Ok(graph_from_lists(cloud.len(), k, &lists))
}

/// K-NN graphs for every `K` in `1..=k_max` from a single neighbour search.
pub fn knn_graphs_nested(
    cloud: &PointCloud,
    k_max: usize,
    metric: Metric,
) -> Result<Vec<DirectedGeometricGraph>> {
    check_k(cloud, k_max)?;
    let lists = neighbour_lists(cloud, k_max, metric);
    Ok(nested_from_lists(cloud.len(), k_max, &lists))
}

fn nested_from_lists(n: usize, k_max: usize, lists: &[Vec<(f64, usize)>]) -> Vec<DirectedGeometricGraph> {
    (1..=k_max)
        .map(|k| {
            let trimmed: Vec<Vec<(f64, usize)>> = lists.iter().map(|l| l[..k].to_vec()).collect();
            graph_from_lists(n, k, &trimmed)
        })
        .collect()
}

fn uses_kdtree(dim: usize, metric: Metric) -> bool {
    match metric {
        Metric::Euclidean => dim <= KDTREE_MAX_DIM,
        Metric::Torus { .. } => dim <= TORUS_KDTREE_MAX_DIM,
    }
}

/// The symmetrized MST together with the K-NN graphs for `K = 1..=k_max`.
/// Where the K-NN search would be brute force, the neighbour lists are
/// collected during the MST pass, so each pair distance is computed once.
pub fn mst_and_knn_graphs(
    cloud: &PointCloud,
    k_max: usize,
    metric: Metric,
) -> Result<(DirectedGeometricGraph, Vec<DirectedGeometricGraph>)> {
    check_k(cloud, k_max)?;
    if uses_kdtree(cloud.dim(), metric) {
        let mst = emst_with_metric(cloud, metric)?;
        return Ok((mst, knn_graphs_nested(cloud, k_max, metric)?));
    }
    let n = cloud.len();
    let mut lists: Vec<Neighbours> = (0..n).map(|_| Neighbours::new(k_max)).collect();
    let edges = prim_core(cloud, metric, Some(&mut lists));
    let lists: Vec<Vec<(f64, usize)>> = lists.into_iter().map(Neighbours::into_sorted).collect();
    Ok((symmetrize(n, &edges), nested_from_lists(n, k_max, &lists)))
}

/// Distance from every point to its `k`-th nearest distinct point.
pub fn kth_nn_distance(cloud: &PointCloud, k: usize) -> Result<Vec<f64>> {
    check_k(cloud, k)?;
    Ok(neighbour_lists(cloud, k, Metric::Euclidean).into_iter().map(|l| l[k - 1].0.sqrt()).collect())
}
