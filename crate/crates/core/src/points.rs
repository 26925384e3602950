use crate::error::{Error, Result};

/// `n` points in `d` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("point dimension must be at least 1"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::input(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        Ok(PointSet { dim, coords })
    }

    pub fn from_1d(values: Vec<f64>) -> Self {
        PointSet {
            dim: 1,
            coords: values,
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::input("cannot infer dimension of an empty row list"))?;
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::input("rows have unequal lengths"));
            }
            coords.extend_from_slice(row);
        }
        PointSet::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.iter().map(|p| p[j]).collect()
    }

    /// Returns a copy with every point translated by `offset`.
    pub fn translated(&self, offset: &[f64]) -> PointSet {
        assert_eq!(offset.len(), self.dim);
        let coords = self
            .iter()
            .flat_map(|p| p.iter().zip(offset).map(|(a, b)| a + b))
            .collect();
        PointSet {
            dim: self.dim,
            coords,
        }
    }

    /// Returns a copy with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> PointSet {
        PointSet {
            dim: self.dim,
            coords: self.coords.iter().map(|v| v * factor).collect(),
        }
    }

    /// Per-axis (min, max) of the points.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        (0..self.dim)
            .map(|j| {
                self.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p[j]), hi.max(p[j]))
                })
            })
            .collect()
    }
}
