//! Exact k-d tree for K-nearest-neighbour queries.
//!
//! Candidates are ordered by `(squared distance, index)`, so ties resolve to
//! the smaller index and results agree edge-for-edge with an all-pairs scan
//! that uses the same distance kernel.

use super::cloud::PointCloud;
use super::metric::{euclid_dist2, Metric};

const LEAF_SIZE: usize = 8;

#[derive(Debug)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

#[derive(Debug)]
pub struct KdTree<'a> {
    cloud: &'a PointCloud,
    order: Vec<usize>,
    nodes: Vec<Node>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

/// Bounded, sorted candidate list for a K-NN query.
#[derive(Debug, Clone)]
pub struct Neighbours {
    k: usize,
    items: Vec<(f64, usize)>,
}

impl Neighbours {
    pub fn new(k: usize) -> Self {
        Self { k, items: Vec::with_capacity(k + 1) }
    }

    #[inline]
    fn worst(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items[self.k - 1].0
        }
    }

    #[inline]
    pub fn offer(&mut self, d2: f64, idx: usize) {
        if self.items.len() == self.k {
            let (wd, wi) = self.items[self.k - 1];
            if d2 > wd || (d2 == wd && idx >= wi) {
                return;
            }
        }
        if self.items.iter().any(|&(_, i)| i == idx) {
            return;
        }
        let pos = self.items.partition_point(|&(d, i)| d < d2 || (d == d2 && i < idx));
        self.items.insert(pos, (d2, idx));
        self.items.truncate(self.k);
    }

    pub fn into_sorted(self) -> Vec<(f64, usize)> {
        self.items
    }
}

impl<'a> KdTree<'a> {
    pub fn new(cloud: &'a PointCloud) -> Self {
        let dim = cloud.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in cloud.points() {
            for a in 0..dim {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let mut tree = Self { cloud, order: (0..cloud.len()).collect(), nodes: Vec::new(), lo, hi };
        if !cloud.is_empty() {
            let n = cloud.len();
            tree.build(0, n);
        }
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let dim = self.cloud.dim();
        // split on the axis of widest spread
        let mut best_axis = 0;
        let mut best_spread = f64::NEG_INFINITY;
        for a in 0..dim {
            let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.order[start..end] {
                let c = self.cloud.point(i)[a];
                mn = mn.min(c);
                mx = mx.max(c);
            }
            if mx - mn > best_spread {
                best_spread = mx - mn;
                best_axis = a;
            }
        }
        if best_spread <= 0.0 {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let cloud = self.cloud;
        self.order[start..end].select_nth_unstable_by(mid - start, |&i, &j| {
            cloud.point(i)[best_axis].total_cmp(&cloud.point(j)[best_axis])
        });
        let value = cloud.point(self.order[mid])[best_axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split { axis: best_axis, value, left, right };
        id
    }

    /// The `k` nearest points to `query` (excluding index `exclude`), sorted
    /// by `(squared distance, index)`.
    pub fn knn(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Vec<(f64, usize)> {
        let mut nb = Neighbours::new(k);
        self.search_shifted(query, query, Metric::Euclidean, exclude, &mut nb);
        nb.into_sorted()
    }

    /// Periodic K-NN on the torus `[0, side)^d`. All points must lie in the
    /// fundamental box.
    pub fn knn_torus(&self, query: &[f64], k: usize, exclude: Option<usize>, side: f64) -> Vec<(f64, usize)> {
        let dim = query.len();
        let metric = Metric::Torus { side };
        let mut nb = Neighbours::new(k);
        self.search_shifted(query, query, metric, exclude, &mut nb);
        let mut shifted = vec![0.0; dim];
        let images = 3usize.pow(dim as u32);
        for code in 0..images {
            let mut c = code;
            let mut zero = true;
            for s in shifted.iter_mut().zip(query) {
                let digit = c % 3;
                c /= 3;
                *s.0 = s.1 + (digit as f64 - 1.0) * side;
                zero &= digit == 1;
            }
            if zero {
                continue;
            }
            if self.box_dist2(&shifted) > nb.worst() {
                continue;
            }
            self.search_shifted(&shifted, query, metric, exclude, &mut nb);
        }
        nb.into_sorted()
    }

    fn box_dist2(&self, q: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((&x, &lo), &hi) in q.iter().zip(&self.lo).zip(&self.hi) {
            let off = (lo - x).max(x - hi).max(0.0);
            acc += off * off;
        }
        acc
    }

    /// Searches with `shifted` driving the pruning and `query` under `metric`
    /// giving the reported distance.
    fn search_shifted(
        &self,
        shifted: &[f64],
        query: &[f64],
        metric: Metric,
        exclude: Option<usize>,
        nb: &mut Neighbours,
    ) {
        if self.nodes.is_empty() {
            return;
        }
        let dim = shifted.len();
        let mut off = vec![0.0; dim];
        let mut rd = 0.0;
        for a in 0..dim {
            let o = (self.lo[a] - shifted[a]).max(shifted[a] - self.hi[a]).max(0.0);
            off[a] = o;
            rd += o * o;
        }
        self.recurse(0, rd, &mut off, shifted, query, metric, exclude, nb);
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &self,
        node: usize,
        rd: f64,
        off: &mut [f64],
        shifted: &[f64],
        query: &[f64],
        metric: Metric,
        exclude: Option<usize>,
        nb: &mut Neighbours,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if Some(i) == exclude {
                        continue;
                    }
                    let p = self.cloud.point(i);
                    let d2 = match metric {
                        Metric::Euclidean => euclid_dist2(query, p),
                        m => m.dist2(query, p),
                    };
                    nb.offer(d2, i);
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = shifted[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.recurse(near, rd, off, shifted, query, metric, exclude, nb);
                let old = off[axis];
                let new_rd = rd - old * old + diff * diff;
                if new_rd <= nb.worst() {
                    off[axis] = diff.abs();
                    self.recurse(far, new_rd, off, shifted, query, metric, exclude, nb);
                    off[axis] = old;
                }
            }
        }
    }
}
