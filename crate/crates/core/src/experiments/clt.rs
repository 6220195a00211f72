use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::FunctionalConstants;
use crate::error::{invalid_param, Error, Result};
use crate::functional::Functional;
use crate::geom::{build_graph, Metric};
use crate::mc::{ks_distance_normal, Estimate, Summary};
use crate::sampling::{label_one_probability, sample_poissonized_pair, Density, SeededRng};
use crate::stats::{conditional_mean, cross_count_labels, sigma_total_knn};

pub const MIN_CLT_REPLICATES: usize = 500;

/// Per-replicate cross counts `T` and conditional means `E[T | positions]`
/// of Poissonized samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub n: f64,
    pub t: Vec<f64>,
    pub cond_mean: Vec<f64>,
}

impl Decomposition {
    pub fn mean_t(&self) -> Estimate {
        Estimate::from_samples(&self.t)
    }

    /// `R1 = (T - E[T | positions]) / sqrt(N)`.
    pub fn r1(&self) -> Vec<f64> {
        let s = self.n.sqrt();
        self.t.iter().zip(&self.cond_mean).map(|(t, m)| (t - m) / s).collect()
    }

    /// `R2 = (E[T | positions] - center) / sqrt(N)`.
    pub fn r2(&self, center: f64) -> Vec<f64> {
        let s = self.n.sqrt();
        self.cond_mean.iter().map(|m| (m - center) / s).collect()
    }

    /// `R = (T - center) / sqrt(N)`.
    pub fn r(&self, center: f64) -> Vec<f64> {
        let s = self.n.sqrt();
        self.t.iter().map(|t| (t - center) / s).collect()
    }
}

/// Simulates `n_replicates` Poissonized samples (`n1_mean` points from `f`,
/// `n2_mean` from `g`) and records `T` and its conditional mean. Replicate
/// `i` uses `rng.child(i)`.
pub fn simulate_decomposition(
    kind: Functional,
    f: &Density,
    g: &Density,
    n1_mean: f64,
    n2_mean: f64,
    n_replicates: usize,
    rng: &SeededRng,
) -> Result<Decomposition> {
    let pairs: Vec<(f64, f64)> = (0..n_replicates)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let s = sample_poissonized_pair(n1_mean, n2_mean, f, g, &rng.child(i as u64))?;
            let graph = build_graph(&s.cloud, kind, Metric::Euclidean)?;
            let pi: Vec<f64> =
                s.cloud.points().map(|z| label_one_probability(n1_mean, n2_mean, f, g, z)).collect();
            Ok((cross_count_labels(&graph, &s.labels) as f64, conditional_mean(&graph, &pi)))
        })
        .collect::<Result<_>>()?;
    let (t, cond_mean) = pairs.into_iter().unzip();
    Ok(Decomposition { n: n1_mean + n2_mean, t, cond_mean })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltConfig {
    pub k: usize,
    pub f: Density,
    pub g: Density,
    pub p: f64,
    pub n: f64,
    pub n_replicates: usize,
    pub seed: u64,
    /// Importance-sampling size for the variance integrals.
    pub mc_n: usize,
}

impl CltConfig {
    pub fn new(k: usize, f: Density, g: Density, p: f64, n: f64, n_replicates: usize, seed: u64) -> Self {
        Self { k, f, g, p, n, n_replicates, seed, mc_n: 200_000 }
    }
}

/// Standardized replicates of `R = (T - E T) / sqrt(N)` for the K-NN
/// statistic, with `E T` estimated from an independent pilot run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub z_scores: Vec<f64>,
    pub ks_distance: f64,
    pub empirical_variance: f64,
    pub theoretical_variance: f64,
    pub theoretical_se: f64,
    pub pilot_mean: Estimate,
}

impl CltReport {
    pub fn variance_ratio(&self) -> f64 {
        self.empirical_variance / self.theoretical_variance
    }

    /// Summary CSV: one `quantity,value` row per field, then nothing else;
    /// z-scores go to [`CltReport::write_z_csv`].
    pub fn write_summary_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["quantity", "value"])?;
        let rows = [
            ("n_replicates", self.z_scores.len() as f64),
            ("ks_distance", self.ks_distance),
            ("empirical_variance", self.empirical_variance),
            ("theoretical_variance", self.theoretical_variance),
            ("theoretical_se", self.theoretical_se),
            ("variance_ratio", self.variance_ratio()),
            ("pilot_mean", self.pilot_mean.value),
            ("pilot_mean_se", self.pilot_mean.se),
        ];
        for (k, v) in rows {
            w.write_record([k.to_string(), format!("{v:?}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_z_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["replicate", "z"])?;
        for (i, z) in self.z_scores.iter().enumerate() {
            w.write_record([i.to_string(), format!("{z:?}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn clt_diagnostic(cfg: &CltConfig, constants: &FunctionalConstants) -> Result<CltReport> {
    if cfg.n_replicates < MIN_CLT_REPLICATES {
        return Err(invalid_param(format!(
            "need at least {MIN_CLT_REPLICATES} replicates, got {}",
            cfg.n_replicates
        )));
    }
    if !(cfg.p > 0.0 && cfg.p < 1.0) || !(cfg.n > 0.0) {
        return Err(invalid_param("need 0 < p < 1 and N > 0"));
    }
    let kind = Functional::Knn(cfg.k);
    let root = SeededRng::new(cfg.seed);
    let variance = sigma_total_knn(cfg.k, constants, &cfg.f, &cfg.g, cfg.p, cfg.mc_n, &root.child(2))?;
    if !(variance.total > 0.0) {
        return Err(Error::Numerical(format!("theoretical variance {} is not positive", variance.total)));
    }
    let (n1, n2) = (cfg.p * cfg.n, (1.0 - cfg.p) * cfg.n);
    let pilot = simulate_decomposition(kind, &cfg.f, &cfg.g, n1, n2, 4 * cfg.n_replicates, &root.child(0))?;
    let pilot_mean = pilot.mean_t();
    let scale = cfg.n.sqrt() * variance.total.sqrt();
    if pilot_mean.se > 0.1 * scale {
        return Err(Error::Numerical(format!(
            "insufficient pilot: mean SE {:.3} exceeds 10% of the scale {:.3}",
            pilot_mean.se, scale
        )));
    }
    let main = simulate_decomposition(kind, &cfg.f, &cfg.g, n1, n2, cfg.n_replicates, &root.child(1))?;
    let r = main.r(pilot_mean.value);
    let sd = variance.total.sqrt();
    let z_scores: Vec<f64> = r.iter().map(|x| x / sd).collect();
    Ok(CltReport {
        ks_distance: ks_distance_normal(&z_scores),
        empirical_variance: Summary::from_slice(&r).variance(),
        theoretical_variance: variance.total,
        theoretical_se: variance.mc_se,
        pilot_mean,
        z_scores,
    })
}
