#![allow(dead_code)]

use crossedge::geom::PointCloud;
use crossedge::sampling::{Density, SeededRng};
use rand::Rng;

pub fn random_cloud(n: usize, d: usize, seed: u64) -> PointCloud {
    let mut r = SeededRng::new(seed).rng();
    let coords = (0..n * d).map(|_| r.random::<f64>()).collect();
    PointCloud::from_flat(d, coords).unwrap()
}

fn d2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Sorts every other point by (distance, index) and keeps the first `k`.
pub fn oracle_knn_edges(cloud: &PointCloud, k: usize) -> Vec<(usize, usize)> {
    let n = cloud.len();
    let mut edges = Vec::new();
    for i in 0..n {
        let mut others: Vec<(f64, usize)> =
            (0..n).filter(|&j| j != i).map(|j| (d2(cloud.point(i), cloud.point(j)), j)).collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        edges.extend(others[..k].iter().map(|&(_, j)| (i, j)));
    }
    edges.sort();
    edges
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Kruskal with union-find; returns the total Euclidean length.
pub fn kruskal_weight(cloud: &PointCloud) -> f64 {
    let n = cloud.len();
    let mut pairs: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (d2(cloud.point(i), cloud.point(j)).sqrt(), i, j))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    let mut used = 0;
    for (w, i, j) in pairs {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a] = b;
            total += w;
            used += 1;
            if used == n - 1 {
                break;
            }
        }
    }
    total
}

/// Minimum total length over all `n^(n-2)` labelled spanning trees,
/// enumerated through Prüfer sequences.
pub fn exhaustive_mst_weight(cloud: &PointCloud) -> f64 {
    let n = cloud.len();
    assert!(n >= 3);
    let mut best = f64::INFINITY;
    let mut seq = vec![0usize; n - 2];
    loop {
        best = best.min(prufer_tree_weight(cloud, &seq));
        let mut pos = 0;
        loop {
            if pos == seq.len() {
                return best;
            }
            seq[pos] += 1;
            if seq[pos] < n {
                break;
            }
            seq[pos] = 0;
            pos += 1;
        }
    }
}

fn prufer_tree_weight(cloud: &PointCloud, seq: &[usize]) -> f64 {
    let n = seq.len() + 2;
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut total = 0.0;
    let w = |a: usize, b: usize| d2(cloud.point(a), cloud.point(b)).sqrt();
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        total += w(leaf, s);
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    total + w(rest[0], rest[1])
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

pub fn pdf(density: &Density, x: f64) -> f64 {
    density.pdf(&[x])
}

pub fn var(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
