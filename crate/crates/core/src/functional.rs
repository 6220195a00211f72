//! Per-vertex degree statistics of a directed graph functional.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Error, Result};
use crate::geom::DirectedGeometricGraph;

/// A rule that assigns a graph to every finite point set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Functional {
    Knn(usize),
    Mst,
}

pub type GraphFunctionalKind = Functional;

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Knn(k) => write!(f, "knn{k}"),
            Functional::Mst => f.write_str("mst"),
        }
    }
}

impl FromStr for Functional {
    type Err = Error;

    /// Accepts `mst` and `knn<K>` (e.g. `knn3`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "mst" || s == "fr" || s == "fr_mst" {
            return Ok(Functional::Mst);
        }
        if let Some(k) = s.strip_prefix("knn").map(|r| r.trim_start_matches('_')) {
            let k: usize = k.parse().map_err(|_| invalid_param(format!("bad functional {s:?}")))?;
            if k == 0 {
                return Err(invalid_param("K must be >= 1"));
            }
            return Ok(Functional::Knn(k));
        }
        Err(invalid_param(format!("unknown functional {s:?}")))
    }
}

/// Local degree counts at one vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LocalStats {
    pub out_deg: usize,
    pub in_deg: usize,
    /// Neighbours joined by edges in both directions.
    pub recip: usize,
    pub t2_up: usize,
    pub t2_down: usize,
    /// 2-stars with one incoming and one outgoing edge.
    pub t2_mixed: usize,
}

impl LocalStats {
    pub fn total_degree(&self) -> usize {
        self.out_deg + self.in_deg
    }
}

fn choose2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

pub fn local_stats(graph: &DirectedGeometricGraph, vertex: usize) -> Result<LocalStats> {
    if vertex >= graph.n_vertices() {
        return Err(invalid_param(format!(
            "vertex {vertex} out of range for a graph with {} vertices",
            graph.n_vertices()
        )));
    }
    Ok(local_stats_unchecked(graph, vertex))
}

pub(crate) fn local_stats_unchecked(graph: &DirectedGeometricGraph, v: usize) -> LocalStats {
    let out_deg = graph.out_degree(v);
    let in_deg = graph.in_degree(v);
    // both neighbour lists are sorted: merge-count the intersection
    let mut recip = 0;
    let mut outs = graph.out_neighbours(v).peekable();
    let mut ins = graph.in_neighbours(v).peekable();
    while let (Some(&a), Some(&b)) = (outs.peek(), ins.peek()) {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => {
                outs.next();
            }
            std::cmp::Ordering::Greater => {
                ins.next();
            }
            std::cmp::Ordering::Equal => {
                recip += 1;
                outs.next();
                ins.next();
            }
        }
    }
    LocalStats {
        out_deg,
        in_deg,
        recip,
        t2_up: choose2(out_deg),
        t2_down: choose2(in_deg),
        t2_mixed: out_deg * in_deg - recip,
    }
}

pub fn edge_count(graph: &DirectedGeometricGraph) -> usize {
    graph.edge_count()
}
