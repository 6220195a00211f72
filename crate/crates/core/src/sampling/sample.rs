use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::density::Density;
use super::rng::SeededRng;
use crate::error::{invalid_input, invalid_param, Error, Result};
use crate::geom::PointCloud;

/// Expected point counts above this are refused.
pub const MAX_EXPECTED_POINTS: f64 = 1e8;

/// Minimum acceptance probability for the truncated-normal rejection sampler.
pub const MIN_ACCEPTANCE: f64 = 1e-3;

/// A pooled point cloud with a sample label (1 or 2) per point.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub cloud: PointCloud,
    pub labels: Vec<u8>,
    pub n1: usize,
    pub n2: usize,
}

impl LabeledSample {
    pub fn new(cloud: PointCloud, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != cloud.len() {
            return Err(invalid_input(format!("{} labels for {} points", labels.len(), cloud.len())));
        }
        if let Some(bad) = labels.iter().find(|&&l| l != 1 && l != 2) {
            return Err(invalid_input(format!("label {bad} is not 1 or 2")));
        }
        let n1 = labels.iter().filter(|&&l| l == 1).count();
        let n2 = labels.len() - n1;
        Ok(Self { cloud, labels, n1, n2 })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Points carrying `label`, in pooled order.
    pub fn group(&self, label: u8) -> impl Iterator<Item = &[f64]> + '_ {
        self.cloud.points().zip(&self.labels).filter(move |(_, &l)| l == label).map(|(p, _)| p)
    }

    /// Reads `x1,...,xd,label` rows; a header row is skipped if present.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .flexible(true)
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut cloud: Option<PointCloud> = None;
        let mut labels = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if line == 0 && record.iter().any(|f| f.parse::<f64>().is_err()) {
                continue;
            }
            if record.len() < 2 {
                return Err(invalid_input(format!(
                    "row {}: need at least one coordinate and a label",
                    line + 1
                )));
            }
            let dim = record.len() - 1;
            let c = cloud.get_or_insert_with(|| PointCloud::new(dim));
            if c.dim() != dim {
                return Err(invalid_input(format!(
                    "row {} has {} coordinates, expected {}",
                    line + 1,
                    dim,
                    c.dim()
                )));
            }
            let mut point = Vec::with_capacity(dim);
            for field in record.iter().take(dim) {
                point.push(
                    field
                        .parse::<f64>()
                        .map_err(|_| invalid_input(format!("row {}: bad coordinate {field:?}", line + 1)))?,
                );
            }
            c.push(&point);
            let label = record[dim].parse::<f64>().ok().filter(|l| *l == 1.0 || *l == 2.0);
            match label {
                Some(l) => labels.push(l as u8),
                None => {
                    return Err(invalid_input(format!(
                        "row {}: label {:?} is not 1 or 2",
                        line + 1,
                        &record[dim]
                    )))
                }
            }
        }
        let cloud = cloud.ok_or_else(|| invalid_input("empty sample file"))?;
        Self::new(cloud, labels)
    }

    /// Writes a header `x1,...,xd,label` followed by one row per point.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let dim = self.cloud.dim();
        let mut header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
        header.push("label".into());
        wtr.write_record(&header)?;
        for (p, l) in self.cloud.points().zip(&self.labels) {
            let mut row: Vec<String> = p.iter().map(|c| format!("{c:?}")).collect();
            row.push(l.to_string());
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Draws a Poisson count with the given mean.
pub fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<usize> {
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(invalid_param(format!("Poisson mean must be positive, got {mean}")));
    }
    if mean > MAX_EXPECTED_POINTS {
        return Err(Error::Resource(format!("expected count {mean:.3e} exceeds {MAX_EXPECTED_POINTS:.0e}")));
    }
    let pois = Poisson::new(mean).map_err(|e| invalid_param(e.to_string()))?;
    Ok(pois.sample(rng) as usize)
}

fn check_means(n1_mean: f64, n2_mean: f64, f: &Density, g: &Density) -> Result<()> {
    if !(n1_mean > 0.0 && n2_mean > 0.0) {
        return Err(invalid_param(format!("sample-size means must be positive (got {n1_mean}, {n2_mean})")));
    }
    if f.dim() != g.dim() {
        return Err(invalid_param("densities have different dimensions"));
    }
    Ok(())
}

fn push_draws<R: Rng + ?Sized>(
    cloud: &mut PointCloud,
    labels: &mut Vec<u8>,
    density: &Density,
    count: usize,
    label: u8,
    rng: &mut R,
) {
    let mut buf = vec![0.0; density.dim()];
    for _ in 0..count {
        density.sample_into(rng, &mut buf);
        cloud.push(&buf);
        labels.push(label);
    }
}

/// Independent `Poisson(n1_mean)` draws from `f` (label 1) and
/// `Poisson(n2_mean)` draws from `g` (label 2), pooled with the label-1
/// points first.
pub fn sample_poissonized_pair(
    n1_mean: f64,
    n2_mean: f64,
    f: &Density,
    g: &Density,
    rng: &SeededRng,
) -> Result<LabeledSample> {
    check_means(n1_mean, n2_mean, f, g)?;
    let mut r = rng.rng();
    let l1 = poisson_count(n1_mean, &mut r)?;
    let l2 = poisson_count(n2_mean, &mut r)?;
    sample_fixed_pair_with(l1, l2, f, g, &mut r)
}

/// Fixed sample sizes: exactly `n1` draws from `f` and `n2` from `g`.
pub fn sample_fixed_pair(
    n1: usize,
    n2: usize,
    f: &Density,
    g: &Density,
    rng: &SeededRng,
) -> Result<LabeledSample> {
    check_means(n1 as f64, n2 as f64, f, g)?;
    sample_fixed_pair_with(n1, n2, f, g, &mut rng.rng())
}

fn sample_fixed_pair_with<R: Rng + ?Sized>(
    n1: usize,
    n2: usize,
    f: &Density,
    g: &Density,
    r: &mut R,
) -> Result<LabeledSample> {
    let mut cloud = PointCloud::with_capacity(f.dim(), n1 + n2);
    let mut labels = Vec::with_capacity(n1 + n2);
    push_draws(&mut cloud, &mut labels, f, n1, 1, r);
    push_draws(&mut cloud, &mut labels, g, n2, 2, r);
    Ok(LabeledSample { cloud, labels, n1, n2 })
}

/// Label-1 probability of a point at `z` in the pooled construction.
pub fn label_one_probability(n1_mean: f64, n2_mean: f64, f: &Density, g: &Density, z: &[f64]) -> f64 {
    let a = n1_mean * f.pdf(z);
    let b = n2_mean * g.pdf(z);
    a / (a + b)
}

/// `Poisson(n1_mean + n2_mean)` points from the mixture
/// `(n1_mean f + n2_mean g) / N`, each labelled 1 independently with
/// probability `n1_mean f(z) / (n1_mean f(z) + n2_mean g(z))`.
pub fn sample_pooled_labeled(
    n1_mean: f64,
    n2_mean: f64,
    f: &Density,
    g: &Density,
    rng: &SeededRng,
) -> Result<LabeledSample> {
    check_means(n1_mean, n2_mean, f, g)?;
    let mut r = rng.rng();
    let total = poisson_count(n1_mean + n2_mean, &mut r)?;
    let w1 = n1_mean / (n1_mean + n2_mean);
    let mut cloud = PointCloud::with_capacity(f.dim(), total);
    let mut labels = Vec::with_capacity(total);
    let mut buf = vec![0.0; f.dim()];
    for _ in 0..total {
        if r.random::<f64>() < w1 {
            f.sample_into(&mut r, &mut buf);
        } else {
            g.sample_into(&mut r, &mut buf);
        }
        let pi = label_one_probability(n1_mean, n2_mean, f, g, &buf);
        if !pi.is_finite() {
            return Err(Error::Internal(format!("drew a point where f + g vanishes: {buf:?}")));
        }
        labels.push(if r.random::<f64>() < pi { 1 } else { 2 });
        cloud.push(&buf);
    }
    LabeledSample::new(cloud, labels)
}

/// Homogeneous Poisson process of the given intensity on `[0, side)^d`.
pub fn sample_poisson_torus(intensity: f64, side: f64, d: usize, rng: &SeededRng) -> Result<PointCloud> {
    if d == 0 || !(side > 0.0) || !(intensity > 0.0) {
        return Err(invalid_param("intensity, side and d must be positive"));
    }
    let mean = intensity * side.powi(d as i32);
    if mean < 1.0 {
        return Err(invalid_param(format!("expected count {mean} below 1; enlarge the window")));
    }
    let mut r = rng.rng();
    let n = poisson_count(mean, &mut r)?;
    let mut cloud = PointCloud::with_capacity(d, n);
    let mut buf = vec![0.0; d];
    for _ in 0..n {
        for c in buf.iter_mut() {
            *c = side * r.random::<f64>();
        }
        cloud.push(&buf);
    }
    Ok(cloud)
}

/// `Poisson(count_mean)` draws from `N(mu, I)` conditioned on
/// `B(0, radius)`, by rejection.
pub fn sample_truncated_normal(
    mu: &[f64],
    radius: f64,
    count_mean: f64,
    rng: &SeededRng,
) -> Result<PointCloud> {
    let density = Density::truncated_normal(mu.to_vec(), radius)?;
    let rate = density.acceptance_rate();
    if rate < MIN_ACCEPTANCE {
        return Err(invalid_param(format!(
            "rejection acceptance rate {rate:.3e} is below {MIN_ACCEPTANCE:.0e}"
        )));
    }
    let mut r = rng.rng();
    let n = poisson_count(count_mean, &mut r)?;
    let mut cloud = PointCloud::with_capacity(mu.len(), n);
    let mut buf = vec![0.0; mu.len()];
    for _ in 0..n {
        density.sample_into(&mut r, &mut buf);
        cloud.push(&buf);
    }
    Ok(cloud)
}
