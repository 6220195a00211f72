use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use serde::Serialize;

use super::cross_count_labels;
use super::integrals::check_p;
use super::variance::{sigma1_null, sigma_null_total_knn};
use crate::constants::FunctionalConstants;
use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::functional::Functional;
use crate::geom::{build_graph, DirectedGeometricGraph, Metric};
use crate::mc::{normal_cdf, Summary};
use crate::sampling::{LabeledSample, SeededRng};

pub const MIN_PERMUTATIONS: usize = 99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TestMethod {
    Asymptotic,
    Permutation,
    Hotelling,
}

impl fmt::Display for TestMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestMethod::Asymptotic => "asymptotic",
            TestMethod::Permutation => "permutation",
            TestMethod::Hotelling => "hotelling",
        })
    }
}

/// Outcome of a two-sample test. Small values of `t_raw` are evidence
/// against the null, so `p_value` is a lower-tail probability.
///
/// CSV columns, in order: `t_raw,center,scale,z,p_value,reject,method,alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestReport {
    pub t_raw: f64,
    pub center: f64,
    pub scale: f64,
    pub z: f64,
    pub p_value: f64,
    pub reject: bool,
    pub method: TestMethod,
    pub alpha: f64,
}

impl TestReport {
    pub const CSV_HEADER: [&'static str; 8] =
        ["t_raw", "center", "scale", "z", "p_value", "reject", "method", "alpha"];

    pub fn write_csv<W: Write>(reports: &[TestReport], writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in reports {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Poisson means `(n1_mean, n2_mean)` used for centering and scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeMeans {
    pub n1: f64,
    pub n2: f64,
}

impl SizeMeans {
    pub fn new(n1: f64, n2: f64) -> Self {
        Self { n1, n2 }
    }

    /// The realized counts, for data whose generating means are unknown.
    pub fn realized(sample: &LabeledSample) -> Self {
        Self { n1: sample.n1 as f64, n2: sample.n2 as f64 }
    }

    pub fn total(&self) -> f64 {
        self.n1 + self.n2
    }

    pub fn p(&self) -> f64 {
        self.n1 / self.total()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid_param(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Null mean of `T`: `(n1 n2 / N^2) K N` for K-NN, and
/// `(n1 n2 / N^2) |E|` over the realized directed edges for the MST.
pub fn null_center(kind: Functional, graph: &DirectedGeometricGraph, sizes: SizeMeans) -> f64 {
    let n = sizes.total();
    let w = sizes.n1 * sizes.n2 / (n * n);
    match kind {
        Functional::Knn(k) => w * k as f64 * n,
        Functional::Mst => w * graph.edge_count() as f64,
    }
}

/// Normal-approximation test on a prebuilt graph.
///
/// K-NN is standardized by the unconditional null variance; the MST, whose
/// unconditional CLT is not available, is centered at the conditional mean
/// given the edge count and standardized by the conditional variance.
pub fn asymptotic_test_on_graph(
    graph: &DirectedGeometricGraph,
    labels: &[u8],
    kind: Functional,
    constants: &FunctionalConstants,
    alpha: f64,
    sizes: SizeMeans,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    if labels.len() != graph.n_vertices() {
        return Err(invalid_input("label count does not match the graph"));
    }
    let p = sizes.p();
    check_p(p)?;
    let sigma_sq = match kind {
        Functional::Knn(k) => sigma_null_total_knn(k, constants, p)?,
        Functional::Mst => sigma1_null(kind, constants, p)?,
    };
    if !(sigma_sq.value > 0.0) {
        return Err(Error::Numerical(format!("null variance {} is not positive", sigma_sq.value)));
    }
    let t = cross_count_labels(graph, labels) as f64;
    let center = null_center(kind, graph, sizes);
    let scale = sizes.total().sqrt() * sigma_sq.value.sqrt();
    let z = (t - center) / scale;
    let p_value = normal_cdf(z);
    Ok(TestReport {
        t_raw: t,
        center,
        scale,
        z,
        p_value,
        reject: p_value <= alpha,
        method: TestMethod::Asymptotic,
        alpha,
    })
}

fn check_sample(sample: &LabeledSample, constants: Option<&FunctionalConstants>) -> Result<()> {
    if sample.n1 == 0 || sample.n2 == 0 {
        return Err(invalid_input("both samples must be nonempty"));
    }
    if let Some(c) = constants {
        if c.d != sample.cloud.dim() {
            return Err(invalid_param(format!(
                "constants are for d = {} but the data have d = {}",
                c.d,
                sample.cloud.dim()
            )));
        }
    }
    Ok(())
}

/// Builds the functional's graph on the pooled sample and runs
/// [`asymptotic_test_on_graph`] with the realized group sizes.
pub fn asymptotic_test(
    sample: &LabeledSample,
    kind: Functional,
    constants: &FunctionalConstants,
    alpha: f64,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    check_sample(sample, Some(constants))?;
    let graph = build_graph(&sample.cloud, kind, Metric::Euclidean)?;
    asymptotic_test_on_graph(&graph, &sample.labels, kind, constants, alpha, SizeMeans::realized(sample))
}

/// Label-permutation test on a prebuilt graph. `center` and `scale` report
/// the mean and standard deviation of the permutation distribution.
pub fn permutation_test_on_graph(
    graph: &DirectedGeometricGraph,
    labels: &[u8],
    alpha: f64,
    n_permutations: usize,
    rng: &SeededRng,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    if n_permutations < MIN_PERMUTATIONS {
        return Err(invalid_param(format!(
            "need at least {MIN_PERMUTATIONS} permutations, got {n_permutations}"
        )));
    }
    if labels.len() != graph.n_vertices() {
        return Err(invalid_input("label count does not match the graph"));
    }
    let t = cross_count_labels(graph, labels);
    let mut r = rng.rng();
    let mut perm = labels.to_vec();
    let mut below = 0usize;
    let mut summary = Summary::default();
    for _ in 0..n_permutations {
        perm.shuffle(&mut r);
        let tp = cross_count_labels(graph, &perm);
        if tp <= t {
            below += 1;
        }
        summary.push(tp as f64);
    }
    let p_value = (1 + below) as f64 / (n_permutations + 1) as f64;
    let scale = summary.variance().sqrt();
    let center = summary.mean();
    let z = if scale > 0.0 { (t as f64 - center) / scale } else { 0.0 };
    Ok(TestReport {
        t_raw: t as f64,
        center,
        scale,
        z,
        p_value,
        reject: p_value <= alpha,
        method: TestMethod::Permutation,
        alpha,
    })
}

/// Builds the graph once and permutes labels over the pooled sample.
pub fn permutation_test(
    sample: &LabeledSample,
    kind: Functional,
    alpha: f64,
    n_permutations: usize,
    rng: &SeededRng,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    if n_permutations < MIN_PERMUTATIONS {
        return Err(invalid_param(format!(
            "need at least {MIN_PERMUTATIONS} permutations, got {n_permutations}"
        )));
    }
    check_sample(sample, None)?;
    let graph = build_graph(&sample.cloud, kind, Metric::Euclidean)?;
    permutation_test_on_graph(&graph, &sample.labels, alpha, n_permutations, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::Symbol;
    use crate::mc::Estimate;
    use crate::sampling::{sample_poissonized_pair, Density};

    fn knn1_constants(d: usize) -> FunctionalConstants {
        let mut c = FunctionalConstants::analytic(Functional::Knn(1), d);
        c.set(Symbol::VarDeltaDown, Estimate::exact(0.6));
        c.set(Symbol::EDeltaPlus, Estimate::exact(0.62));
        c
    }

    fn null_sample(seed: u64) -> LabeledSample {
        let f = Density::uniform_box(2, 1.0);
        sample_poissonized_pair(60.0, 40.0, &f, &f, &SeededRng::new(seed)).unwrap()
    }

    #[test]
    fn p_value_is_normal_cdf_of_z() {
        for seed in 0..5 {
            let s = null_sample(seed);
            let r = asymptotic_test(&s, Functional::Knn(1), &knn1_constants(2), 0.05).unwrap();
            assert_eq!(r.p_value, normal_cdf(r.z));
            assert_eq!(r.reject, r.p_value <= 0.05);
            assert_eq!(r.method, TestMethod::Asymptotic);
        }
    }

    #[test]
    fn permutation_p_value_is_a_rank() {
        let s = null_sample(3);
        let b = 99;
        let r = permutation_test(&s, Functional::Mst, 0.05, b, &SeededRng::new(1)).unwrap();
        let k = r.p_value * (b + 1) as f64;
        assert!((k - k.round()).abs() < 1e-9 && (1.0..=100.0).contains(&k.round()));
    }

    #[test]
    fn argument_checks() {
        let s = null_sample(0);
        let c = knn1_constants(2);
        assert!(asymptotic_test(&s, Functional::Knn(1), &c, 0.0).is_err());
        assert!(asymptotic_test(&s, Functional::Knn(1), &knn1_constants(3), 0.05).is_err());
        assert!(permutation_test(&s, Functional::Knn(1), 0.05, 98, &SeededRng::new(0)).is_err());
        let err = asymptotic_test(&s, Functional::Knn(2), &c, 0.05).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn report_csv_column_order() {
        let s = null_sample(1);
        let r = asymptotic_test(&s, Functional::Knn(1), &knn1_constants(2), 0.05).unwrap();
        let mut buf = Vec::new();
        TestReport::write_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), TestReport::CSV_HEADER.join(","));
        assert!(text.lines().nth(1).unwrap().contains(",asymptotic,"));
    }
}
