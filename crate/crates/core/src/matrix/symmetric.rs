use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Matrix;
use crate::error::{Error, Result};

/// Symmetry tolerance applied when a full square grid is loaded.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Dense real symmetric matrix.
///
/// Only the upper triangle is stored (row-major), so `get(i, j) == get(j, i)`
/// holds exactly by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    packed: Vec<f64>,
}

#[inline]
fn packed_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * dim - i + 1) / 2 + (j - i)
}

fn packed_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidDimension(
            "dimension must be at least 1".into(),
        ));
    }
    Ok(())
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            packed: vec![0.0; packed_len(dim)],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        Self::from_fn(d, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle (`i <= j`).
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_dim(dim)?;
        let mut packed = Vec::with_capacity(packed_len(dim));
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                packed.push(v);
            }
        }
        Ok(Self { dim, packed })
    }

    /// Builds a matrix from its upper triangle, row-major: `(0,0), (0,1), .., (0,d-1), (1,1), ..`.
    pub fn from_upper_triangle(dim: usize, upper: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if upper.len() != packed_len(dim) {
            return Err(Error::DimensionMismatch {
                expected: packed_len(dim),
                found: upper.len(),
            });
        }
        let m = Self { dim, packed: upper };
        m.check_finite()?;
        Ok(m)
    }

    /// Loads a full square grid. Off-diagonal pairs must agree to within
    /// [`SYMMETRY_TOLERANCE`] (relative to their magnitude when that exceeds 1);
    /// the stored value is their average.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        check_dim(d)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let (a, b) = (rows[i][j], rows[j][i]);
                let diff = (a - b).abs();
                if diff > SYMMETRY_TOLERANCE * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        diff,
                    });
                }
            }
        }
        Self::from_fn(d, |i, j| {
            if i == j {
                rows[i][i]
            } else {
                0.5 * (rows[i][j] + rows[j][i])
            }
        })
    }

    /// `v vᵀ`.
    pub fn outer(v: &[f64]) -> Result<Self> {
        Self::from_fn(v.len(), |i, j| v[i] * v[j])
    }

    /// `B Bᵀ` for a general matrix `B`.
    pub fn gram(b: &Matrix) -> Result<Self> {
        Self::from_fn(b.rows(), |i, j| {
            b.row(i).iter().zip(b.row(j)).map(|(x, y)| x * y).sum()
        })
    }

    /// `M S Mᵀ` where `M` is square of matching dimension.
    pub fn congruence(&self, m: &Matrix) -> Result<Self> {
        if m.rows() != self.dim || m.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.rows(),
            });
        }
        let ms = m.matmul(&self.to_dense())?;
        Self::from_fn(self.dim, |i, j| {
            ms.row(i).iter().zip(m.row(j)).map(|(x, y)| x * y).sum()
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[packed_index(self.dim, i, j)]
    }

    pub fn upper_triangle(&self) -> &[f64] {
        &self.packed
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn to_dense(&self) -> Matrix {
        Matrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let packed = self
            .packed
            .iter()
            .zip(&other.packed)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            dim: self.dim,
            packed,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            packed: self.packed.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.packed
            .iter()
            .zip(&other.packed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn check_finite(&self) -> Result<()> {
        for i in 0..self.dim {
            for j in i..self.dim {
                if !self.get(i, j).is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}

impl Serialize for SymmetricMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SymmetricMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        SymmetricMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
