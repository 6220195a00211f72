/// Distance geometry used for graph construction.
///
/// All comparisons are made on squared distances; reported edge lengths are
/// the square roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Euclidean,
    /// Flat torus `[0, side)^d` with the periodic (minimum image) metric.
    Torus {
        side: f64,
    },
}

impl Metric {
    #[inline]
    pub fn dist2(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Metric::Euclidean => euclid_dist2(a, b),
            Metric::Torus { side } => torus_dist2(a, b, side),
        }
    }
}

#[inline]
pub fn euclid_dist2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // independent lanes let the compiler vectorize the reduction
    let mut acc = [0.0f64; 4];
    let (ca, ra) = a.split_at(a.len() / 4 * 4);
    let (cb, rb) = b.split_at(ca.len());
    for (x, y) in ca.chunks_exact(4).zip(cb.chunks_exact(4)) {
        for l in 0..4 {
            let d = x[l] - y[l];
            acc[l] += d * d;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        let d = x - y;
        tail += d * d;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn torus_dist2(a: &[f64], b: &[f64], side: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let mut d = (x - y).abs();
        if d > 0.5 * side {
            d = side - d;
        }
        acc += d * d;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_uses_minimum_image() {
        let d2 = torus_dist2(&[0.1, 0.5], &[9.9, 0.5], 10.0);
        assert!((d2 - 0.04).abs() < 1e-12);
        assert_eq!(euclid_dist2(&[0.0, 0.0], &[3.0, 4.0]), 25.0);
    }
}
