use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::MIN_EXPECTED_COUNT;
use crate::error::{invalid_param, Result};
use crate::functional::Functional;
use crate::geom::{build_graph, torus_dist2, Metric};
use crate::mc::{isotonic_nonincreasing, ols_slope, Estimate, Summary};
use crate::sampling::{sample_poisson_torus, unit_ball_volume, SeededRng};

/// Estimates of `C_d = E|X|^d` and `C_2d = E|X|^{2d}` for the nearest point
/// `X` of a unit-rate Poisson process to the origin, with their closed forms
/// `1/V_d` and `2/V_d^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    pub d: usize,
    pub c_d: Estimate,
    pub c_2d: Estimate,
    pub expected_c_d: f64,
    pub expected_c_2d: f64,
}

pub fn moment_check_cd(d: usize, mc_n: usize, rng: &SeededRng) -> Result<MomentCheck> {
    if d == 0 {
        return Err(invalid_param("dimension must be positive"));
    }
    if mc_n < 10_000 {
        return Err(invalid_param(format!("mc_n must be at least 1e4, got {mc_n}")));
    }
    let vd = unit_ball_volume(d);
    let mut r = rng.rng();
    let (mut s1, mut s2) = (Summary::default(), Summary::default());
    let mut x = vec![0.0; d];
    for _ in 0..mc_n {
        // P(|X| > s) = exp(-V_d s^d); invert for the radius
        let u: f64 = 1.0 - r.random::<f64>();
        let radius = (-u.ln() / vd).powf(1.0 / d as f64);
        let mut norm2 = 0.0f64;
        for c in x.iter_mut() {
            *c = StandardNormal.sample(&mut r);
            norm2 += *c * *c;
        }
        let scale = radius / norm2.sqrt();
        let len2: f64 = x.iter().map(|c| (c * scale) * (c * scale)).sum();
        let pd = len2.powf(d as f64 / 2.0);
        s1.push(pd);
        s2.push(pd * pd);
    }
    Ok(MomentCheck {
        d,
        c_d: Estimate { value: s1.mean(), se: s1.se() },
        c_2d: Estimate { value: s2.mean(), se: s2.se() },
        expected_c_d: 1.0 / vd,
        expected_c_2d: 2.0 / (vd * vd),
    })
}

/// Tail of the stabilization radius of the K-NN out-degree measure.
#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate {
    pub k: usize,
    pub d: usize,
    pub s_grid: Vec<f64>,
    /// Raw exceedance fractions with binomial standard errors.
    pub tau_raw: Vec<Estimate>,
    /// Nonincreasing (isotonic) version of `tau_raw`.
    pub tau_hat: Vec<f64>,
    /// Least-squares slope of `ln tau_hat` on `s^d` where `tau_hat > 0`.
    pub fit_slope: f64,
    pub n_replicates: usize,
}

/// Fraction of replicates in which the `k`-th nearest neighbour of a point
/// inserted into a unit-rate torus process lies farther than `s`. Points
/// beyond that distance cannot change the inserted point's out-edges, so
/// this distance is a stabilization radius.
pub fn stabilization_tail(
    k: usize,
    d: usize,
    s_grid: &[f64],
    n_replicates: usize,
    rng: &SeededRng,
) -> Result<TailEstimate> {
    if k == 0 || d == 0 {
        return Err(invalid_param("K and d must be positive"));
    }
    if s_grid.is_empty() || s_grid[0] <= 0.0 || s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid_param("s_grid must be positive and strictly increasing"));
    }
    if n_replicates == 0 {
        return Err(invalid_param("need at least one replicate"));
    }
    let s_max = *s_grid.last().unwrap();
    // the window must contain B(centre, s_max) without wrapping
    let side = (4.0 * s_max).max(200f64.powf(1.0 / d as f64));
    let centre = vec![side / 2.0; d];
    let kth: Vec<f64> = (0..n_replicates)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let cloud = sample_poisson_torus(1.0, side, d, &rng.child(i as u64))?;
            if cloud.len() < k {
                return Ok(f64::INFINITY);
            }
            let mut d2: Vec<f64> = cloud.points().map(|p| torus_dist2(p, &centre, side)).collect();
            let (_, kth, _) = d2.select_nth_unstable_by(k - 1, f64::total_cmp);
            Ok(kth.sqrt())
        })
        .collect::<Result<_>>()?;

    let n = n_replicates as f64;
    let tau_raw: Vec<Estimate> = s_grid
        .iter()
        .map(|&s| {
            let p = kth.iter().filter(|&&r| r > s).count() as f64 / n;
            Estimate { value: p, se: (p * (1.0 - p) / n).sqrt() }
        })
        .collect();
    if tau_raw.iter().all(|e| e.value == 0.0) {
        return Err(invalid_param("every tail estimate is zero; the s grid is too coarse"));
    }
    let tau_hat = isotonic_nonincreasing(&tau_raw.iter().map(|e| e.value).collect::<Vec<_>>());
    let (xs, ys): (Vec<f64>, Vec<f64>) = s_grid
        .iter()
        .zip(&tau_hat)
        .filter(|(_, &t)| t > 0.0)
        .map(|(&s, &t)| (s.powi(d as i32), t.ln()))
        .unzip();
    let fit_slope = if xs.len() >= 2 { ols_slope(&xs, &ys) } else { f64::NAN };
    Ok(TailEstimate { k, d, s_grid: s_grid.to_vec(), tau_raw, tau_hat, fit_slope, n_replicates })
}

/// The joint out-degree covariance integral
/// `∫ (E[d↑(0, P^z) d↑(z, P^0)] - (E Δ0↑)^2) dz`, pointwise and integrated.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDegreeCovariance {
    pub z_grid: Vec<f64>,
    pub integrand: Vec<Estimate>,
    pub integral: Estimate,
}

/// Inserts a pair of points at each separation of `z_grid` into torus
/// processes and integrates the out-degree covariance radially (trapezoid
/// rule over the grid, surface factor `d V_d r^{d-1}`).
pub fn joint_degree_covariance(
    kind: Functional,
    d: usize,
    z_grid: &[f64],
    n_replicates: usize,
    expected_count: f64,
    rng: &SeededRng,
) -> Result<JointDegreeCovariance> {
    if expected_count < MIN_EXPECTED_COUNT {
        return Err(invalid_param(format!("expected count {expected_count} is below {MIN_EXPECTED_COUNT}")));
    }
    if z_grid.is_empty() || z_grid.windows(2).any(|w| w[1] <= w[0]) || z_grid[0] < 0.0 {
        return Err(invalid_param("z_grid must be nonnegative and increasing"));
    }
    if n_replicates < 2 {
        return Err(invalid_param("need at least two replicates"));
    }
    let side = expected_count.powf(1.0 / d as f64);
    if 2.0 * z_grid[z_grid.len() - 1] >= side {
        return Err(invalid_param("largest separation does not fit in the window"));
    }
    let mean_out = match kind {
        Functional::Knn(k) => k as f64,
        Functional::Mst => 2.0,
    };
    let metric = Metric::Torus { side };
    let integrand = z_grid
        .iter()
        .enumerate()
        .map(|(j, &radius)| -> Result<Estimate> {
            let grid_rng = rng.child(j as u64);
            let products: Vec<f64> = (0..n_replicates)
                .into_par_iter()
                .map(|i| -> Result<f64> {
                    let stream = grid_rng.child(i as u64);
                    let mut cloud = sample_poisson_torus(1.0, side, d, &stream)?;
                    let mut r = stream.child(u64::MAX).rng();
                    let mut dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut r)).collect();
                    let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
                    dir.iter_mut().for_each(|c| *c /= norm);
                    let origin = vec![side / 2.0; d];
                    let other: Vec<f64> =
                        origin.iter().zip(&dir).map(|(o, u)| (o + radius * u).rem_euclid(side)).collect();
                    let a = cloud.len();
                    cloud.push(&origin);
                    cloud.push(&other);
                    let g = build_graph(&cloud, kind, metric)?;
                    Ok((g.out_degree(a) * g.out_degree(a + 1)) as f64)
                })
                .collect::<Result<_>>()?;
            let s = Summary::from_slice(&products);
            Ok(Estimate { value: s.mean() - mean_out * mean_out, se: s.se() })
        })
        .collect::<Result<Vec<_>>>()?;

    let surface = d as f64 * unit_ball_volume(d);
    let mut weights = vec![0.0; z_grid.len()];
    for j in 1..z_grid.len() {
        let h = z_grid[j] - z_grid[j - 1];
        weights[j - 1] += 0.5 * h * surface * z_grid[j - 1].powi(d as i32 - 1);
        weights[j] += 0.5 * h * surface * z_grid[j].powi(d as i32 - 1);
    }
    let integral = Estimate {
        value: weights.iter().zip(&integrand).map(|(w, e)| w * e.value).sum(),
        se: weights.iter().zip(&integrand).map(|(w, e)| (w * e.se).powi(2)).sum::<f64>().sqrt(),
    };
    Ok(JointDegreeCovariance { z_grid: z_grid.to_vec(), integrand, integral })
}
