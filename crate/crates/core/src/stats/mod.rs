//! The cross-edge statistic, its limits and variances, and calibrated tests.

mod integrals;
mod test;
mod variance;

pub use integrals::{MixtureIntegrals, MIN_MC_N};
pub use test::{
    asymptotic_test, asymptotic_test_on_graph, null_center, permutation_test, permutation_test_on_graph,
    SizeMeans, TestMethod, TestReport, MIN_PERMUTATIONS,
};
pub use variance::{
    sigma1_alternative, sigma1_alternative_from, sigma1_null, sigma1_null_general, sigma1_null_published,
    sigma2_knn, sigma2_knn_from, sigma_null_total_knn, sigma_null_total_knn_published, sigma_total_knn,
    VarianceBreakdown,
};

use crate::error::{invalid_input, invalid_param, Result};
use crate::geom::DirectedGeometricGraph;
use crate::mc::Estimate;
use crate::sampling::{Density, LabeledSample, SeededRng};

/// Number of directed edges `x -> y` with `label(x) = 1` and `label(y) = 2`.
pub fn cross_count(graph: &DirectedGeometricGraph, sample: &LabeledSample) -> Result<usize> {
    if graph.n_vertices() != sample.len() {
        return Err(invalid_input(format!(
            "graph has {} vertices but the sample has {} points",
            graph.n_vertices(),
            sample.len()
        )));
    }
    Ok(cross_count_labels(graph, &sample.labels))
}

/// [`cross_count`] on a bare label slice; panics if it is shorter than the graph.
pub fn cross_count_labels(graph: &DirectedGeometricGraph, labels: &[u8]) -> usize {
    graph.edges().iter().filter(|e| labels[e.src] == 1 && labels[e.dst] == 2).count()
}

/// `E[T | positions] = Σ_{(x,y)} π(x)(1 - π(y))` for independent labels with
/// label-1 probabilities `pi`.
pub fn conditional_mean(graph: &DirectedGeometricGraph, pi: &[f64]) -> f64 {
    graph.edges().iter().map(|e| pi[e.src] * (1.0 - pi[e.dst])).sum()
}

/// Henze-Penrose dissimilarity `1 - 2pq ∫ f g / (p f + q g)`.
pub fn hp_dissimilarity(f: &Density, g: &Density, p: f64, mc_n: usize, rng: &SeededRng) -> Result<Estimate> {
    let ints = MixtureIntegrals::estimate(f, g, p, mc_n, rng)?;
    Ok(dissimilarity_from(&ints))
}

fn dissimilarity_from(ints: &MixtureIntegrals) -> Estimate {
    let r = 2.0 * ints.p * (1.0 - ints.p);
    let i1 = ints.fg_over_phi();
    Estimate { value: 1.0 - r * i1.value, se: r * i1.se }
}

/// Limit in probability of `T / N`: `(E Δ0↑ / 2)(1 - δ(f, g, p))`.
pub fn weak_limit(
    e_delta_up: f64,
    f: &Density,
    g: &Density,
    p: f64,
    mc_n: usize,
    rng: &SeededRng,
) -> Result<Estimate> {
    if !(e_delta_up > 0.0) {
        return Err(invalid_param(format!("mean out-degree must be positive, got {e_delta_up}")));
    }
    let delta = hp_dissimilarity(f, g, p, mc_n, rng)?;
    Ok(Estimate { value: 0.5 * e_delta_up * (1.0 - delta.value), se: 0.5 * e_delta_up * delta.se })
}
