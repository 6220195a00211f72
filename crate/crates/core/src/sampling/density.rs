use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid_param, Error, Result};

/// A sampling density on `R^d` with a normalized evaluator.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    /// Uniform on the cube `[lower, lower + side]^d`.
    UniformBox {
        lower: Vec<f64>,
        side: f64,
    },
    /// `N(mu, I)` conditioned on the ball `B(0, radius)`.
    TruncatedNormal {
        mu: Vec<f64>,
        radius: f64,
        /// `P(|N(mu, I)| <= radius)`, cached at construction.
        mass: f64,
    },
    Gaussian {
        mu: Vec<f64>,
    },
}

impl Density {
    pub fn uniform_box(d: usize, side: f64) -> Self {
        Density::UniformBox { lower: vec![0.0; d], side }
    }

    pub fn uniform_box_at(lower: Vec<f64>, side: f64) -> Self {
        Density::UniformBox { lower, side }
    }

    pub fn gaussian(mu: Vec<f64>) -> Self {
        Density::Gaussian { mu }
    }

    pub fn truncated_normal(mu: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(invalid_param("truncation radius must be positive"));
        }
        let mass = ball_mass(&mu, radius);
        if !(mass > 0.0) {
            return Err(invalid_param(format!("truncated normal has no mass in B(0, {radius})")));
        }
        Ok(Density::TruncatedNormal { mu, radius, mass })
    }

    pub fn dim(&self) -> usize {
        match self {
            Density::UniformBox { lower, .. } => lower.len(),
            Density::TruncatedNormal { mu, .. } | Density::Gaussian { mu } => mu.len(),
        }
    }

    /// Density value at `x`.
    pub fn pdf(&self, x: &[f64]) -> f64 {
        match self {
            Density::UniformBox { lower, side } => {
                let inside = x.iter().zip(lower).all(|(&c, &lo)| c >= lo && c <= lo + side);
                if inside {
                    side.powi(-(x.len() as i32))
                } else {
                    0.0
                }
            }
            Density::TruncatedNormal { mu, radius, mass } => {
                let r2: f64 = x.iter().map(|c| c * c).sum();
                if r2 > radius * radius {
                    0.0
                } else {
                    gaussian_pdf(x, mu) / mass
                }
            }
            Density::Gaussian { mu } => gaussian_pdf(x, mu),
        }
    }

    /// Draws one point into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Density::UniformBox { lower, side } => {
                for (o, lo) in out.iter_mut().zip(lower) {
                    *o = lo + side * rng.random::<f64>();
                }
            }
            Density::TruncatedNormal { mu, radius, .. } => {
                let r2max = radius * radius;
                loop {
                    let mut r2 = 0.0;
                    for (o, m) in out.iter_mut().zip(mu) {
                        let z: f64 = StandardNormal.sample(rng);
                        *o = m + z;
                        r2 += *o * *o;
                    }
                    if r2 <= r2max {
                        break;
                    }
                }
            }
            Density::Gaussian { mu } => {
                for (o, m) in out.iter_mut().zip(mu) {
                    let z: f64 = StandardNormal.sample(rng);
                    *o = m + z;
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        out
    }

    /// Probability that one untruncated proposal is accepted (1 for the
    /// non-rejection samplers).
    pub fn acceptance_rate(&self) -> f64 {
        match self {
            Density::TruncatedNormal { mass, .. } => *mass,
            _ => 1.0,
        }
    }

    /// Returns the density translated by `shift`.
    pub fn shifted(&self, shift: &[f64]) -> Result<Self> {
        let add = |v: &[f64]| v.iter().zip(shift).map(|(a, b)| a + b).collect::<Vec<_>>();
        Ok(match self {
            Density::UniformBox { lower, side } => Density::UniformBox { lower: add(lower), side: *side },
            Density::TruncatedNormal { mu, radius, .. } => Density::truncated_normal(add(mu), *radius)?,
            Density::Gaussian { mu } => Density::Gaussian { mu: add(mu) },
        })
    }
}

fn gaussian_pdf(x: &[f64], mu: &[f64]) -> f64 {
    let d = x.len() as f64;
    let q: f64 = x.iter().zip(mu).map(|(a, b)| (a - b) * (a - b)).sum();
    (-0.5 * q - 0.5 * d * (2.0 * PI).ln()).exp()
}

/// `P(|X| <= radius)` for `X ~ N(mu, I)`: the noncentral chi-square CDF,
/// summed as a Poisson mixture of central chi-square CDFs.
pub fn ball_mass(mu: &[f64], radius: f64) -> f64 {
    let d = mu.len() as f64;
    let x = radius * radius;
    let half_lambda: f64 = 0.5 * mu.iter().map(|m| m * m).sum::<f64>();
    if half_lambda == 0.0 {
        return ChiSquared::new(d).expect("positive dof").cdf(x);
    }
    // Terms are summed outward from the Poisson mode until both tails vanish.
    let mode = half_lambda.floor() as u64;
    let term = |j: u64| {
        let jf = j as f64;
        let log_w = -half_lambda + jf * half_lambda.ln() - ln_gamma(jf + 1.0);
        log_w.exp() * ChiSquared::new(d + 2.0 * jf).expect("positive dof").cdf(x)
    };
    let weight = |j: u64| {
        let jf = j as f64;
        (-half_lambda + jf * half_lambda.ln() - ln_gamma(jf + 1.0)).exp()
    };
    let mut total = term(mode);
    let mut j = mode + 1;
    while weight(j) > 1e-17 {
        total += term(j);
        j += 1;
    }
    let mut j = mode;
    while j > 0 {
        j -= 1;
        if weight(j) < 1e-17 {
            break;
        }
        total += term(j);
    }
    total.min(1.0)
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    (h * PI.ln() - ln_gamma(h + 1.0)).exp()
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
        match self {
            Density::UniformBox { lower, side } => {
                write!(f, "uniform:lower={};side={side}", join(lower))
            }
            Density::TruncatedNormal { mu, radius, .. } => {
                write!(f, "tnormal:mu={};radius={radius}", join(mu))
            }
            Density::Gaussian { mu } => write!(f, "gaussian:mu={}", join(mu)),
        }
    }
}

impl FromStr for Density {
    type Err = Error;

    /// Parses `uniform:d=3;side=1`, `uniform:lower=0,0;side=2`,
    /// `tnormal:mu=0,0,0;radius=6` and `gaussian:mu=1,1`. A vector written
    /// `v*d` repeats `v` d times.
    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) =
            s.split_once(':').ok_or_else(|| invalid_param(format!("density {s:?} lacks a `tag:` prefix")))?;
        let mut d: Option<usize> = None;
        let mut side = 1.0;
        let mut radius = 6.0;
        let mut vector: Option<Vec<f64>> = None;
        for kv in rest.split(';').filter(|kv| !kv.trim().is_empty()) {
            let (k, v) =
                kv.split_once('=').ok_or_else(|| invalid_param(format!("bad density field {kv:?}")))?;
            let num = |v: &str| {
                v.trim().parse::<f64>().map_err(|_| invalid_param(format!("bad number {v:?} in density")))
            };
            match k.trim() {
                "d" => d = Some(v.trim().parse().map_err(|_| invalid_param(format!("bad d {v:?}")))?),
                "side" => side = num(v)?,
                "radius" => radius = num(v)?,
                "lower" | "mu" => vector = Some(parse_vector(v)?),
                other => return Err(invalid_param(format!("unknown density field {other:?}"))),
            }
        }
        let vec_or_zero = |d: Option<usize>, v: Option<Vec<f64>>| -> Result<Vec<f64>> {
            match (v, d) {
                (Some(v), Some(d)) if v.len() != d => {
                    Err(invalid_param("density vector length disagrees with d"))
                }
                (Some(v), _) => Ok(v),
                (None, Some(d)) if d > 0 => Ok(vec![0.0; d]),
                _ => Err(invalid_param("density needs d or a vector")),
            }
        };
        match tag.trim() {
            "uniform" => Ok(Density::UniformBox { lower: vec_or_zero(d, vector)?, side }),
            "tnormal" | "truncated_normal" => Density::truncated_normal(vec_or_zero(d, vector)?, radius),
            "gaussian" | "normal" => Ok(Density::Gaussian { mu: vec_or_zero(d, vector)? }),
            other => Err(invalid_param(format!("unknown density {other:?}"))),
        }
    }
}

fn parse_vector(v: &str) -> Result<Vec<f64>> {
    if let Some((x, n)) = v.split_once('*') {
        let x: f64 = x.trim().parse().map_err(|_| invalid_param(format!("bad vector {v:?}")))?;
        let n: usize = n.trim().parse().map_err(|_| invalid_param(format!("bad vector {v:?}")))?;
        return Ok(vec![x; n]);
    }
    v.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| invalid_param(format!("bad vector {v:?}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::SeededRng;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ball_mass_one_dimension() {
        // P(|Z + 1| <= 2) = Phi(1) - Phi(-3)
        let m = ball_mass(&[1.0], 2.0);
        assert!((m - (0.841_344_746_068_543 - 0.001_349_898_031_630_1)).abs() < 1e-9, "{m}");
    }

    #[test]
    fn evaluators_integrate_to_one() {
        // uniform proposal over a box containing each support
        let cases: Vec<(Density, f64, f64)> = vec![
            (Density::uniform_box_at(vec![0.5, -0.5], 1.5), -1.0, 2.0),
            (Density::truncated_normal(vec![0.3, -0.2], 2.0).unwrap(), -2.0, 2.0),
            (Density::gaussian(vec![0.1, 0.0]), -7.0, 7.0),
        ];
        let mut rng = SeededRng::new(11).rng();
        let n = 1_000_000;
        for (dens, lo, hi) in cases {
            let vol = (hi - lo) * (hi - lo);
            let mut acc = 0.0;
            for _ in 0..n {
                let x = [lo + (hi - lo) * rng.random::<f64>(), lo + (hi - lo) * rng.random::<f64>()];
                acc += dens.pdf(&x);
            }
            let integral = acc / n as f64 * vol;
            assert!((integral - 1.0).abs() < 0.01, "{dens}: {integral}");
        }
    }

    #[test]
    fn parse_round_trip() {
        let d: Density = "tnormal:mu=0.5*3;radius=6".parse().unwrap();
        assert_eq!(d.dim(), 3);
        let again: Density = d.to_string().parse().unwrap();
        assert_eq!(d, again);
        let u: Density = "uniform:d=2;side=3".parse().unwrap();
        assert_eq!(u, Density::uniform_box(2, 3.0));
        assert!("cauchy:d=2".parse::<Density>().is_err());
    }
}
