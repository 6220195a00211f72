use crate::functional::Functional;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub length: f64,
}

/// Which construction produced a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphKind {
    Knn(usize),
    /// Minimum spanning tree with every undirected edge replaced by both
    /// directed edges.
    MstSymmetrized,
}

impl GraphKind {
    pub fn functional(self) -> Functional {
        match self {
            GraphKind::Knn(k) => Functional::Knn(k),
            GraphKind::MstSymmetrized => Functional::Mst,
        }
    }
}

/// Directed edge list with forward and reverse adjacency in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGeometricGraph {
    n_vertices: usize,
    kind: GraphKind,
    edges: Vec<Edge>,
    out_offsets: Vec<usize>,
    out_edges: Vec<usize>,
    in_offsets: Vec<usize>,
    in_edges: Vec<usize>,
}

impl DirectedGeometricGraph {
    /// Builds the adjacency indices. Edges are stored sorted by `(src, dst)`.
    pub fn from_edges(n_vertices: usize, kind: GraphKind, mut edges: Vec<Edge>) -> Self {
        edges.sort_by_key(|a| (a.src, a.dst));
        debug_assert!(edges.iter().all(|e| e.src != e.dst && e.dst < n_vertices));
        debug_assert!(edges.windows(2).all(|w| (w[0].src, w[0].dst) != (w[1].src, w[1].dst)));
        let (out_offsets, out_edges) = csr(n_vertices, edges.iter().map(|e| e.src));
        let (in_offsets, in_edges) = csr(n_vertices, edges.iter().map(|e| e.dst));
        Self { n_vertices, kind, edges, out_offsets, out_edges, in_offsets, in_edges }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_offsets[v + 1] - self.out_offsets[v]
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_offsets[v + 1] - self.in_offsets[v]
    }

    /// Destinations of edges leaving `v`, in increasing order.
    pub fn out_neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_edges[self.out_offsets[v]..self.out_offsets[v + 1]].iter().map(move |&e| self.edges[e].dst)
    }

    /// Sources of edges entering `v`, in increasing order.
    pub fn in_neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.in_edges[self.in_offsets[v]..self.in_offsets[v + 1]].iter().map(move |&e| self.edges[e].src)
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        let slice = &self.out_edges[self.out_offsets[src]..self.out_offsets[src + 1]];
        slice.binary_search_by_key(&dst, |&e| self.edges[e].dst).is_ok()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }
}

fn csr(n: usize, keys: impl Iterator<Item = usize> + Clone) -> (Vec<usize>, Vec<usize>) {
    let mut offsets = vec![0usize; n + 1];
    for k in keys.clone() {
        offsets[k + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut slots = vec![0usize; offsets[n]];
    // edges are sorted by (src, dst), so each bucket comes out ordered
    for (e, k) in keys.enumerate() {
        slots[fill[k]] = e;
        fill[k] += 1;
    }
    (offsets, slots)
}
