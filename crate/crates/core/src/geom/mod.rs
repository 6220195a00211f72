//! Point clouds and the geometric graphs built on them.

mod cloud;
mod graph;
pub mod kdtree;
mod knn;
mod metric;
mod mst;

pub use cloud::PointCloud;
pub use graph::{DirectedGeometricGraph, Edge, GraphKind};
pub use knn::{
    brute_neighbour_lists, knn_graph, knn_graph_brute, knn_graph_with_metric, knn_graphs_nested,
    kth_nn_distance, mst_and_knn_graphs, neighbour_lists,
};
pub use metric::{euclid_dist2, torus_dist2, Metric};
pub use mst::{emst, emst_with_metric, prim_edges};

use crate::error::Result;
use crate::functional::Functional;

/// Builds the graph of `functional` on `cloud`.
pub fn build_graph(
    cloud: &PointCloud,
    functional: Functional,
    metric: Metric,
) -> Result<DirectedGeometricGraph> {
    match functional {
        Functional::Knn(k) => knn_graph_with_metric(cloud, k, metric),
        Functional::Mst => emst_with_metric(cloud, metric),
    }
}
