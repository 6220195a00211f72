use super::cloud::PointCloud;
use super::graph::{DirectedGeometricGraph, Edge, GraphKind};
use super::kdtree::Neighbours;
use super::metric::Metric;
use crate::error::{invalid_param, Result};

/// Undirected MST edges `(u, v, squared length)` with `u < v`, by dense
/// Prim. `O(n^2)` time, `O(n)` memory.
///
/// Among equal candidate weights the lexicographically smaller
/// `(tree vertex, new vertex)` pair wins.
pub fn prim_edges(cloud: &PointCloud, metric: Metric) -> Vec<(usize, usize, f64)> {
    prim_core(cloud, metric, None)
}

/// Prim's algorithm evaluates every pair distance exactly once; when `lists`
/// is given, each distance is also offered to both endpoints' K-NN lists.
pub(crate) fn prim_core(
    cloud: &PointCloud,
    metric: Metric,
    mut lists: Option<&mut [Neighbours]>,
) -> Vec<(usize, usize, f64)> {
    let n = cloud.len();
    if n < 2 {
        return Vec::new();
    }
    // vertices outside the tree, with their best distance and tree parent
    let mut outside: Vec<usize> = (1..n).collect();
    let mut best = vec![f64::INFINITY; n - 1];
    let mut parent = vec![0usize; n - 1];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0;
    while !outside.is_empty() {
        let p = cloud.point(current);
        let mut pick = 0;
        for j in 0..outside.len() {
            let v = outside[j];
            let d2 = metric.dist2(p, cloud.point(v));
            if let Some(l) = lists.as_deref_mut() {
                l[current].offer(d2, v);
                l[v].offer(d2, current);
            }
            if d2 < best[j] || (d2 == best[j] && current < parent[j]) {
                best[j] = d2;
                parent[j] = current;
            }
            if best[j] < best[pick]
                || (best[j] == best[pick] && (parent[j], v) < (parent[pick], outside[pick]))
            {
                pick = j;
            }
        }
        let (v, u, d2) = (outside[pick], parent[pick], best[pick]);
        outside.swap_remove(pick);
        best.swap_remove(pick);
        parent.swap_remove(pick);
        edges.push((u.min(v), u.max(v), d2));
        current = v;
    }
    edges
}

/// Euclidean minimum spanning tree, returned in symmetrized form (both
/// directions of every tree edge).
pub fn emst(cloud: &PointCloud) -> Result<DirectedGeometricGraph> {
    emst_with_metric(cloud, Metric::Euclidean)
}

pub fn emst_with_metric(cloud: &PointCloud, metric: Metric) -> Result<DirectedGeometricGraph> {
    if cloud.len() < 2 {
        return Err(invalid_param(format!("MST needs at least 2 points, got {}", cloud.len())));
    }
    cloud.check_finite()?;
    Ok(symmetrize(cloud.len(), &prim_edges(cloud, metric)))
}

pub(crate) fn symmetrize(n: usize, undirected: &[(usize, usize, f64)]) -> DirectedGeometricGraph {
    let edges = undirected
        .iter()
        .flat_map(|&(u, v, d2)| {
            let length = d2.sqrt();
            [Edge { src: u, dst: v, length }, Edge { src: v, dst: u, length }]
        })
        .collect();
    DirectedGeometricGraph::from_edges(n, GraphKind::MstSymmetrized, edges)
}
