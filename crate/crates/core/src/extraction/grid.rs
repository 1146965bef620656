//! Dense scalar grids over the normalization cube.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::Vec3;

/// Scalar samples on a regular lattice, x fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarGrid {
    pub dims: [usize; 3],
    pub origin: Vec3,
    pub spacing: f64,
    pub values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(dims: [usize; 3], origin: Vec3, spacing: f64, values: Vec<f64>) -> Result<Self> {
        let n = dims[0] * dims[1] * dims[2];
        if values.len() != n {
            return Err(Error::Dimension { expected: n, actual: values.len() });
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidScale(spacing));
        }
        Ok(Self { dims, origin, spacing, values })
    }

    /// `res^3` vertices spanning `[-0.5, 0.5]^3` inclusive.
    pub fn unit_cube(res: usize, values: Vec<f64>) -> Result<Self> {
        if res < 2 {
            return Err(Error::InvalidParameter(format!("grid resolution must be at least 2, got {res}")));
        }
        Self::new([res; 3], Vec3::repeat(-0.5), 1.0 / (res - 1) as f64, values)
    }

    /// Samples `f` at every vertex of [`ScalarGrid::unit_cube`].
    pub fn sample_unit_cube(res: usize, f: impl Fn(&Vec3) -> f64 + Sync) -> Result<Self> {
        use rayon::prelude::*;
        if res < 2 {
            return Err(Error::InvalidParameter(format!("grid resolution must be at least 2, got {res}")));
        }
        let step = 1.0 / (res - 1) as f64;
        let values = (0..res * res * res)
            .into_par_iter()
            .map(|n| {
                let (i, j, k) = (n % res, (n / res) % res, n / (res * res));
                f(&Vec3::new(-0.5 + i as f64 * step, -0.5 + j as f64 * step, -0.5 + k as f64 * step))
            })
            .collect();
        Self::unit_cube(res, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[1] + j) * self.dims[0] + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    pub fn position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.spacing
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    /// Raw dump: three little-endian u32 dimensions, then f32 values.
    pub fn write_raw(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut write = || -> std::io::Result<()> {
            for d in self.dims {
                w.write_all(&(d as u32).to_le_bytes())?;
            }
            for v in &self.values {
                w.write_all(&(*v as f32).to_le_bytes())?;
            }
            w.flush()
        };
        write().map_err(|e| Error::io(path, e))
    }

    /// Reads a raw dump. Origin and spacing are those of
    /// [`ScalarGrid::unit_cube`].
    pub fn read_raw(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() < 12 {
            return Err(Error::format("grid", "truncated header"));
        }
        let dim = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let dims = [dim(0), dim(4), dim(8)];
        let n = dims[0] * dims[1] * dims[2];
        if bytes.len() != 12 + 4 * n {
            return Err(Error::format("grid", format!("expected {n} values")));
        }
        let values = bytes[12..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect();
        let spacing = 1.0 / (dims[0].max(2) - 1) as f64;
        Self::new(dims, Vec3::repeat(-0.5), spacing, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_x_fastest() {
        let g = ScalarGrid::sample_unit_cube(3, |p| p.x + 10.0 * p.y + 100.0 * p.z).unwrap();
        assert_eq!(g.values[1] - g.values[0], 0.5);
        assert_eq!(g.values[3] - g.values[0], 5.0);
        assert_eq!(g.values[9] - g.values[0], 50.0);
        assert_eq!(g.position(2, 2, 2), Vec3::repeat(0.5));
    }

    #[test]
    fn raw_dump_round_trip() {
        let g = ScalarGrid::sample_unit_cube(4, |p| p.norm() - 0.3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.raw");
        g.write_raw(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 12 + 4 * 64);
        assert_eq!(&bytes[..4], &4u32.to_le_bytes());
        let back = ScalarGrid::read_raw(&path).unwrap();
        assert_eq!(back.dims, g.dims);
        for (a, b) in back.values.iter().zip(&g.values) {
            assert_eq!(*a, *b as f32 as f64);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(ScalarGrid::unit_cube(1, vec![0.0]).is_err());
        assert!(ScalarGrid::unit_cube(2, vec![0.0; 7]).is_err());
    }
}
