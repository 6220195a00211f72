use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal};

use crate::constants::FunctionalConstants;
use crate::error::{invalid_param, Result};
use crate::functional::Functional;
use crate::geom::knn_graph;
use crate::mc::{normal_quantile, Estimate, Summary};
use crate::sampling::{sample_poissonized_pair, Density, SeededRng, MIN_ACCEPTANCE};
use crate::stats::{asymptotic_test_on_graph, sigma_null_total_knn, SizeMeans};

/// `E[(h'X)^2]` for `X ~ N(0, I_d)` conditioned on `B(0, radius)`, in closed
/// form: by symmetry `E[XX'] = c I` with
/// `c = P(χ²_{d+2} <= S²) / P(χ²_d <= S²)`.
pub fn truncated_second_moment(h: &[f64], radius: f64) -> f64 {
    let d = h.len() as f64;
    let s2 = radius * radius;
    let num = ChiSquared::new(d + 2.0).expect("positive dof").cdf(s2);
    let den = ChiSquared::new(d).expect("positive dof").cdf(s2);
    h.iter().map(|x| x * x).sum::<f64>() * num / den
}

/// The limiting local power `Φ(z_α + c E[(h'X)^2] / σ)` evaluated with the
/// constant as stated (`c = r²/4`) and as implied by the mean drift of the
/// statistic (`c = pq`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoreticalPower {
    pub second_moment: Estimate,
    pub stated: Estimate,
    pub drift: Estimate,
}

/// `sigma` is the null standard deviation of `(T - E T)/sqrt(N)` (with its
/// standard error); the second moment is estimated by sampling
/// the truncated normal.
pub fn theoretical_local_power(
    h: &[f64],
    alpha: f64,
    p: f64,
    sigma: Estimate,
    radius: f64,
    mc_n: usize,
    rng: &SeededRng,
) -> Result<TheoreticalPower> {
    if !(sigma.value > 0.0) {
        return Err(invalid_param("sigma must be positive"));
    }
    if !(alpha > 0.0 && alpha < 1.0) || !(p > 0.0 && p < 1.0) {
        return Err(invalid_param("need 0 < alpha < 1 and 0 < p < 1"));
    }
    if h.is_empty() || mc_n < 2 {
        return Err(invalid_param("h must be nonempty and mc_n >= 2"));
    }
    let density = Density::truncated_normal(vec![0.0; h.len()], radius)?;
    if density.acceptance_rate() < MIN_ACCEPTANCE {
        return Err(invalid_param("truncation ball is too small for rejection sampling"));
    }
    let mut r = rng.rng();
    let mut x = vec![0.0; h.len()];
    let mut s = Summary::default();
    for _ in 0..mc_n {
        density.sample_into(&mut r, &mut x);
        let dot: f64 = h.iter().zip(&x).map(|(a, b)| a * b).sum();
        s.push(dot * dot);
    }
    let m = Estimate { value: s.mean(), se: s.se() };
    let q = 1.0 - p;
    let r2 = 4.0 * p * p * q * q;
    let z_alpha = normal_quantile(alpha);
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    let eval = |c: f64| {
        let arg = z_alpha + c * m.value / sigma.value;
        let dens = normal.pdf(arg);
        let d_m = c / sigma.value * m.se;
        let d_sigma = c * m.value / (sigma.value * sigma.value) * sigma.se;
        Estimate { value: normal.cdf(arg), se: dens * (d_m * d_m + d_sigma * d_sigma).sqrt() }
    };
    Ok(TheoreticalPower { second_moment: m, stated: eval(r2 / 4.0), drift: eval(p * q) })
}

/// Normal-location comparison of the limiting power with the empirical
/// power of the asymptotic 1-NN test.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPowerConfig {
    pub h: Vec<f64>,
    pub radius: f64,
    pub p: f64,
    pub alpha: f64,
    pub n: f64,
    /// Rate exponent of `δ_N = h N^{-a}`.
    pub a: f64,
    pub iterations: usize,
    pub mc_n: usize,
    pub seed: u64,
}

impl Default for LocalPowerConfig {
    fn default() -> Self {
        Self {
            h: vec![1.0, 1.0],
            radius: 3.0,
            p: 0.6,
            alpha: 0.05,
            n: 4000.0,
            a: 0.25,
            iterations: 1000,
            mc_n: 200_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalPowerReport {
    pub sigma: Estimate,
    pub theory: TheoreticalPower,
    pub empirical: Estimate,
    /// `theory.stated - empirical`.
    pub gap_stated: f64,
    /// `theory.drift - empirical`.
    pub gap_drift: f64,
}

impl LocalPowerReport {
    pub fn write_csv<W: Write>(&self, cfg: &LocalPowerConfig, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["quantity", "value", "se"])?;
        let exact = |v: f64| Estimate::exact(v);
        let rows = [
            ("d", exact(cfg.h.len() as f64)),
            ("n", exact(cfg.n)),
            ("p", exact(cfg.p)),
            ("alpha", exact(cfg.alpha)),
            ("a", exact(cfg.a)),
            ("radius", exact(cfg.radius)),
            ("iterations", exact(cfg.iterations as f64)),
            ("second_moment", self.theory.second_moment),
            ("second_moment_closed_form", exact(truncated_second_moment(&cfg.h, cfg.radius))),
            ("sigma", self.sigma),
            ("power_stated_r2_over_4", self.theory.stated),
            ("power_drift_pq", self.theory.drift),
            ("power_empirical", self.empirical),
            ("gap_stated", exact(self.gap_stated)),
            ("gap_drift", exact(self.gap_drift)),
        ];
        for (k, e) in rows {
            w.write_record([k.to_string(), format!("{:?}", e.value), format!("{:?}", e.se)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluates both candidate formulas and the empirical rejection rate of the
/// 1-NN asymptotic test; `constants` must be the `knn1` entry for `d = h.len()`.
pub fn local_power_cross_validation(
    cfg: &LocalPowerConfig,
    constants: &FunctionalConstants,
) -> Result<LocalPowerReport> {
    if cfg.iterations == 0 {
        return Err(invalid_param("need at least one iteration"));
    }
    let d = cfg.h.len();
    if constants.kind != Functional::Knn(1) || constants.d != d {
        return Err(invalid_param(format!("need knn1 constants for d = {d}")));
    }
    let root = SeededRng::new(cfg.seed);
    let var = sigma_null_total_knn(1, constants, cfg.p)?;
    let sigma = Estimate { value: var.value.sqrt(), se: var.se / (2.0 * var.value.sqrt()) };
    let theory =
        theoretical_local_power(&cfg.h, cfg.alpha, cfg.p, sigma, cfg.radius, cfg.mc_n, &root.child(0))?;

    let shift = cfg.n.powf(-cfg.a);
    let f = Density::truncated_normal(vec![0.0; d], cfg.radius)?;
    let g = Density::truncated_normal(cfg.h.iter().map(|x| x * shift).collect(), cfg.radius)?;
    let sizes = SizeMeans::new(cfg.p * cfg.n, (1.0 - cfg.p) * cfg.n);
    let streams = root.child(1);
    let rejections: Vec<bool> = (0..cfg.iterations)
        .into_par_iter()
        .map(|i| -> Result<bool> {
            let s = sample_poissonized_pair(sizes.n1, sizes.n2, &f, &g, &streams.child(i as u64))?;
            let graph = knn_graph(&s.cloud, 1)?;
            let r =
                asymptotic_test_on_graph(&graph, &s.labels, Functional::Knn(1), constants, cfg.alpha, sizes)?;
            Ok(r.reject)
        })
        .collect::<Result<_>>()?;
    let power = rejections.iter().filter(|&&r| r).count() as f64 / cfg.iterations as f64;
    let empirical = Estimate { value: power, se: (power * (1.0 - power) / cfg.iterations as f64).sqrt() };
    Ok(LocalPowerReport {
        sigma,
        theory,
        empirical,
        gap_stated: theory.stated.value - power,
        gap_drift: theory.drift.value - power,
    })
}
