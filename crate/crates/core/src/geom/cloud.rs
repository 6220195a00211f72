use std::io::{Read, Write};
use std::path::Path;

use crate::error::{invalid_input, invalid_param, Result};

/// An ordered set of points in `R^d`, stored row-major.
///
/// Point order is part of the identity of a cloud: graphs built on it refer
/// to points by index.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize) -> Self {
        Self::with_capacity(dim, 0)
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self { dim, coords: Vec::with_capacity(dim * n) }
    }

    /// Builds a cloud from a flat row-major coordinate buffer.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid_param("dimension must be positive"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(invalid_input(format!(
                "coordinate buffer of length {} is not a multiple of dim {dim}",
                coords.len()
            )));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut cloud = Self::with_capacity(dim.max(1), rows.len());
        if dim == 0 {
            return Err(invalid_param("dimension must be positive"));
        }
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(invalid_input(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    row.len()
                )));
            }
            cloud.coords.extend_from_slice(row);
        }
        Ok(cloud)
    }

    pub fn push(&mut self, point: &[f64]) {
        assert_eq!(point.len(), self.dim, "point dimension mismatch");
        self.coords.extend_from_slice(point);
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    /// Fails with an invalid-input error on the first non-finite coordinate.
    pub fn check_finite(&self) -> Result<()> {
        match self.coords.iter().position(|c| !c.is_finite()) {
            Some(pos) => Err(invalid_input(format!(
                "non-finite coordinate at point {}, axis {}",
                pos / self.dim,
                pos % self.dim
            ))),
            None => Ok(()),
        }
    }

    /// Applies `f` to every coordinate, returning a new cloud.
    pub fn map_coords(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { dim: self.dim, coords: self.coords.iter().map(|&c| f(c)).collect() }
    }

    /// Returns the cloud with points reordered so that new point `i` is old
    /// point `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.len());
        let mut out = Self::with_capacity(self.dim, perm.len());
        for &i in perm {
            out.push(self.point(i));
        }
        out
    }

    /// Concatenates two clouds of equal dimension.
    pub fn concat(&self, other: &PointCloud) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Self { dim: self.dim, coords }
    }

    /// Reads a header-less CSV with one point per row.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .flexible(true)
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut cloud: Option<PointCloud> = None;
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let row = record
                .iter()
                .map(|s| {
                    s.parse::<f64>().map_err(|_| {
                        invalid_input(format!("row {}: cannot parse {s:?} as a number", line + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let c = cloud.get_or_insert_with(|| PointCloud::new(row.len().max(1)));
            if row.len() != c.dim {
                return Err(invalid_input(format!(
                    "row {} has {} columns, expected {}",
                    line + 1,
                    row.len(),
                    c.dim
                )));
            }
            c.coords.extend_from_slice(&row);
        }
        cloud.ok_or_else(|| invalid_input("empty point file"))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for p in self.points() {
            wtr.write_record(p.iter().map(|c| format!("{c:?}")))?;
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
