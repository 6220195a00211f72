use rand::Rng;

use crate::error::{invalid_param, Result};
use crate::mc::Estimate;
use crate::sampling::{Density, SeededRng};

pub const MIN_MC_N: usize = 1000;

/// Importance-sampling estimates of the mixture integrals appearing in the
/// dissimilarity and the alternative variances, all drawn from the same
/// sample of `phi = p f + q g`:
///
/// | index | integral              | integrand under `phi` |
/// |-------|-----------------------|-----------------------|
/// | 0     | `∫ f g / phi`         | `f g / phi^2`         |
/// | 1     | `∫ f^2 g / phi^2`     | `f^2 g / phi^3`       |
/// | 2     | `∫ f g^2 / phi^2`     | `f g^2 / phi^3`       |
/// | 3     | `∫ f^2 g^2 / phi^3`   | `f^2 g^2 / phi^4`     |
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureIntegrals {
    pub p: f64,
    pub n: usize,
    mean: [f64; 4],
    /// Sample covariance of the four integrands.
    cov: [[f64; 4]; 4],
}

impl MixtureIntegrals {
    pub fn estimate(f: &Density, g: &Density, p: f64, mc_n: usize, rng: &SeededRng) -> Result<Self> {
        check_p(p)?;
        if mc_n < MIN_MC_N {
            return Err(invalid_param(format!("mc_n must be at least {MIN_MC_N}, got {mc_n}")));
        }
        if f.dim() != g.dim() {
            return Err(invalid_param("densities have different dimensions"));
        }
        let q = 1.0 - p;
        let mut r = rng.rng();
        let mut x = vec![0.0; f.dim()];
        let mut mean = [0.0f64; 4];
        let mut m2 = [[0.0f64; 4]; 4];
        for i in 0..mc_n {
            if r.random::<f64>() < p {
                f.sample_into(&mut r, &mut x);
            } else {
                g.sample_into(&mut r, &mut x);
            }
            let fx = f.pdf(&x);
            let gx = g.pdf(&x);
            let phi = p * fx + q * gx;
            if !(phi > 0.0) {
                return Err(invalid_param(
                    "mixture density vanishes at a sampled point; densities are degenerate",
                ));
            }
            let fg = fx * gx / (phi * phi);
            let vals = [fg, fg * fx / phi, fg * gx / phi, fg * fg];
            // Welford update of mean and co-moments
            let k = (i + 1) as f64;
            let delta: [f64; 4] = std::array::from_fn(|a| vals[a] - mean[a]);
            for a in 0..4 {
                mean[a] += delta[a] / k;
            }
            for a in 0..4 {
                for b in 0..4 {
                    m2[a][b] += delta[a] * (vals[b] - mean[b]);
                }
            }
        }
        let denom = (mc_n - 1) as f64;
        let cov = std::array::from_fn(|a| std::array::from_fn(|b| m2[a][b] / denom));
        Ok(Self { p, n: mc_n, mean, cov })
    }

    fn get(&self, i: usize) -> Estimate {
        Estimate { value: self.mean[i], se: (self.cov[i][i] / self.n as f64).sqrt() }
    }

    pub fn fg_over_phi(&self) -> Estimate {
        self.get(0)
    }

    pub fn f2g_over_phi2(&self) -> Estimate {
        self.get(1)
    }

    pub fn fg2_over_phi2(&self) -> Estimate {
        self.get(2)
    }

    pub fn f2g2_over_phi3(&self) -> Estimate {
        self.get(3)
    }

    /// Estimate of `Σ c_i I_i` with its Monte Carlo standard error.
    pub fn combination(&self, coeffs: [f64; 4]) -> Estimate {
        let value = coeffs.iter().zip(&self.mean).map(|(c, m)| c * m).sum();
        let mut var = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                var += coeffs[a] * coeffs[b] * self.cov[a][b];
            }
        }
        Estimate { value, se: (var.max(0.0) / self.n as f64).sqrt() }
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(invalid_param(format!("p must lie in (0, 1), got {p}")))
    }
}
