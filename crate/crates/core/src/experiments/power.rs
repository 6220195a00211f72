use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::hotelling::hotelling_t2;
use crate::constants::{lookup, FunctionalConstants};
use crate::error::{invalid_param, Error, Result};
use crate::functional::Functional;
use crate::geom::{emst, knn_graphs_nested, mst_and_knn_graphs, Metric};
use crate::sampling::{sample_fixed_pair, sample_poissonized_pair, Density, LabeledSample, SeededRng};
use crate::stats::{asymptotic_test_on_graph, permutation_test_on_graph, SizeMeans};

pub const DEFAULT_TRUNCATION_RADIUS: f64 = 6.0;
pub const MIN_ITERATIONS: usize = 50;

/// A test run at every grid point of a power curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestSpec {
    /// K-NN cross count with the asymptotic normal calibration.
    Knn(usize),
    /// Friedman-Rafsky MST cross count with a permutation calibration.
    FrMst,
    Hotelling,
}

impl TestSpec {
    pub const DEFAULT: [TestSpec; 5] =
        [TestSpec::Knn(1), TestSpec::Knn(2), TestSpec::Knn(3), TestSpec::FrMst, TestSpec::Hotelling];
}

impl fmt::Display for TestSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestSpec::Knn(k) => write!(f, "knn{k}"),
            TestSpec::FrMst => f.write_str("fr_mst"),
            TestSpec::Hotelling => f.write_str("hotelling"),
        }
    }
}

impl FromStr for TestSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hotelling" => Ok(TestSpec::Hotelling),
            "fr_mst" | "fr" | "mst" => Ok(TestSpec::FrMst),
            other => match other.parse::<Functional>() {
                Ok(Functional::Knn(k)) => Ok(TestSpec::Knn(k)),
                _ => Err(invalid_param(format!("unknown test {s:?}"))),
            },
        }
    }
}

/// How sample sizes are drawn at each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrawMode {
    /// `Poisson(n1)` and `Poisson(n2)` points.
    Poissonized,
    /// Exactly `n1` and `n2` points.
    Fixed,
}

impl fmt::Display for DrawMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DrawMode::Poissonized => "poissonized",
            DrawMode::Fixed => "fixed",
        })
    }
}

impl FromStr for DrawMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "poissonized" | "poisson" => Ok(DrawMode::Poissonized),
            "fixed" => Ok(DrawMode::Fixed),
            _ => Err(invalid_param(format!("unknown draw mode {s:?}"))),
        }
    }
}

/// Normal-location power study: sample 1 from `N(0, I)` and sample 2 from
/// `N(δ_N 1, I)`, both truncated to `B(0, radius)`, with
/// `δ_N = h N^{-a}` and `N = n1 + n2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerConfig {
    pub a: f64,
    pub h_grid: Vec<f64>,
    pub d: usize,
    pub n1: f64,
    pub n2: f64,
    pub iterations: usize,
    pub tests: Vec<TestSpec>,
    pub alpha: f64,
    pub seed: u64,
    pub mode: DrawMode,
    pub radius: f64,
    /// Label permutations per `fr_mst` test.
    pub permutations: usize,
}

impl PowerConfig {
    pub fn new(d: usize, a: f64, h_grid: Vec<f64>, n1: f64, n2: f64, iterations: usize, seed: u64) -> Self {
        Self {
            a,
            h_grid,
            d,
            n1,
            n2,
            iterations,
            tests: TestSpec::DEFAULT.to_vec(),
            alpha: 0.05,
            seed,
            mode: DrawMode::Poissonized,
            radius: DEFAULT_TRUNCATION_RADIUS,
            permutations: 199,
        }
    }

    pub fn shift(&self, h: f64) -> f64 {
        h * (self.n1 + self.n2).powf(-self.a)
    }

    fn validate(&self) -> Result<()> {
        if self.h_grid.is_empty() {
            return Err(invalid_param("h grid is empty"));
        }
        if self.iterations < MIN_ITERATIONS {
            return Err(invalid_param(format!(
                "need at least {MIN_ITERATIONS} iterations, got {}",
                self.iterations
            )));
        }
        if self.d == 0 || !(self.n1 > 0.0 && self.n2 > 0.0) {
            return Err(invalid_param("d, n1 and n2 must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid_param(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.tests.is_empty() {
            return Err(invalid_param("no tests selected"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerPoint {
    pub h: f64,
    pub rejections: usize,
    /// Iterations on which the test could be run.
    pub n_valid: usize,
    pub power: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    pub test: TestSpec,
    pub points: Vec<PowerPoint>,
}

impl PowerSeries {
    pub fn powers(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.power).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    pub config: PowerConfig,
    pub series: Vec<PowerSeries>,
}

#[derive(Serialize)]
struct Row<'a> {
    h: f64,
    test: &'a str,
    power: f64,
    se: f64,
    a: f64,
    d: usize,
    n1: f64,
    n2: f64,
    alpha: f64,
    seed: u64,
}

impl PowerCurve {
    pub fn series(&self, test: TestSpec) -> Option<&PowerSeries> {
        self.series.iter().find(|s| s.test == test)
    }

    /// Columns `h,test,power,se,a,d,n1,n2,alpha,seed`, one row per
    /// `(test, h)`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let c = &self.config;
        let mut w = csv::Writer::from_writer(writer);
        for s in &self.series {
            let name = s.test.to_string();
            for p in &s.points {
                w.serialize(Row {
                    h: p.h,
                    test: &name,
                    power: p.power,
                    se: p.se,
                    a: c.a,
                    d: c.d,
                    n1: c.n1,
                    n2: c.n2,
                    alpha: c.alpha,
                    seed: c.seed,
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn draw(cfg: &PowerConfig, f: &Density, g: &Density, rng: &SeededRng) -> Result<LabeledSample> {
    match cfg.mode {
        DrawMode::Poissonized => sample_poissonized_pair(cfg.n1, cfg.n2, f, g, rng),
        DrawMode::Fixed => sample_fixed_pair(cfg.n1.round() as usize, cfg.n2.round() as usize, f, g, rng),
    }
}

/// Decisions of every configured test on one sample; `None` where the test
/// could not be run (too few points, singular covariance).
fn run_tests(
    cfg: &PowerConfig,
    sample: &LabeledSample,
    knn_constants: &[Option<&FunctionalConstants>],
    rng: &SeededRng,
) -> Result<Vec<Option<bool>>> {
    let sizes = match cfg.mode {
        DrawMode::Poissonized => SizeMeans::new(cfg.n1, cfg.n2),
        DrawMode::Fixed => SizeMeans::realized(sample),
    };
    let n = sample.len();
    let k_max = cfg
        .tests
        .iter()
        .filter_map(|t| match t {
            TestSpec::Knn(k) if *k < n => Some(*k),
            _ => None,
        })
        .max();
    let wants_mst = cfg.tests.contains(&TestSpec::FrMst) && n >= 2;
    let (mst, knn) = match (k_max, wants_mst) {
        (Some(k), true) => {
            let (m, g) = mst_and_knn_graphs(&sample.cloud, k, Metric::Euclidean)?;
            (Some(m), g)
        }
        (Some(k), false) => (None, knn_graphs_nested(&sample.cloud, k, Metric::Euclidean)?),
        (None, true) => (Some(emst(&sample.cloud)?), Vec::new()),
        (None, false) => (None, Vec::new()),
    };
    let mut out = Vec::with_capacity(cfg.tests.len());
    for (i, test) in cfg.tests.iter().enumerate() {
        let decision = match *test {
            TestSpec::Knn(k) if k < n && sample.n1 > 0 && sample.n2 > 0 => {
                let c = knn_constants[i].expect("checked before the run");
                let r = asymptotic_test_on_graph(
                    &knn[k - 1],
                    &sample.labels,
                    Functional::Knn(k),
                    c,
                    cfg.alpha,
                    sizes,
                )?;
                Some(r.reject)
            }
            TestSpec::FrMst if n >= 2 && sample.n1 > 0 && sample.n2 > 0 => {
                let g = mst.as_ref().expect("built above");
                let r = permutation_test_on_graph(
                    g,
                    &sample.labels,
                    cfg.alpha,
                    cfg.permutations,
                    &rng.child(i as u64),
                )?;
                Some(r.reject)
            }
            TestSpec::Hotelling => match hotelling_t2(sample, cfg.alpha) {
                Ok(r) => Some(r.reject),
                Err(Error::Numerical(_) | Error::InvalidInput(_)) => None,
                Err(e) => return Err(e),
            },
            _ => None,
        };
        out.push(decision);
    }
    Ok(out)
}

/// Empirical rejection rates over the `h` grid. K-NN tests need matching
/// entries (`knn<K>`, dimension `d`) in `constants`.
///
/// Iteration `j` at grid index `i` uses stream `seed.child(i).child(j)`;
/// all tests at that point see the same sample.
pub fn power_curve(cfg: &PowerConfig, constants: &[FunctionalConstants]) -> Result<PowerCurve> {
    cfg.validate()?;
    let knn_constants: Vec<Option<&FunctionalConstants>> = cfg
        .tests
        .iter()
        .map(|t| match t {
            TestSpec::Knn(k) => lookup(constants, Functional::Knn(*k), cfg.d).map(Some).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "no constants for knn{k} in d = {}; run `constants` first",
                    cfg.d
                ))
            }),
            _ => Ok(None),
        })
        .collect::<Result<_>>()?;

    let f = Density::truncated_normal(vec![0.0; cfg.d], cfg.radius)?;
    let root = SeededRng::new(cfg.seed);
    let jobs: Vec<(usize, usize)> =
        (0..cfg.h_grid.len()).flat_map(|i| (0..cfg.iterations).map(move |j| (i, j))).collect();
    let shifted: Vec<Density> = cfg
        .h_grid
        .iter()
        .map(|&h| Density::truncated_normal(vec![cfg.shift(h); cfg.d], cfg.radius))
        .collect::<Result<_>>()?;
    let decisions: Vec<Vec<Option<bool>>> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let stream = root.child(i as u64).child(j as u64);
            let sample = draw(cfg, &f, &shifted[i], &stream)?;
            run_tests(cfg, &sample, &knn_constants, &stream.child(u64::MAX))
        })
        .collect::<Result<_>>()?;

    let series = cfg
        .tests
        .iter()
        .enumerate()
        .map(|(t, &test)| {
            let points = cfg
                .h_grid
                .iter()
                .enumerate()
                .map(|(i, &h)| {
                    let rows = &decisions[i * cfg.iterations..(i + 1) * cfg.iterations];
                    let valid: Vec<bool> = rows.iter().filter_map(|r| r[t]).collect();
                    let n_valid = valid.len();
                    if n_valid < cfg.iterations {
                        log::warn!(
                            "{test} at h = {h}: {} of {} iterations skipped",
                            cfg.iterations - n_valid,
                            cfg.iterations
                        );
                    }
                    let rejections = valid.iter().filter(|&&r| r).count();
                    let power = if n_valid > 0 { rejections as f64 / n_valid as f64 } else { f64::NAN };
                    PowerPoint {
                        h,
                        rejections,
                        n_valid,
                        power,
                        se: (power * (1.0 - power) / n_valid as f64).sqrt(),
                    }
                })
                .collect();
            PowerSeries { test, points }
        })
        .collect();
    Ok(PowerCurve { config: cfg.clone(), series })
}
