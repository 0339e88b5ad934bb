use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

/// Slack on the unit-norm requirement for data points.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// `d × n` data matrix whose `n` columns are data points in the unit ℓ₂ ball.
/// Columns are stored contiguously.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    dim: usize,
    count: usize,
    points: Vec<f64>,
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl DataMatrix {
    /// `points` holds `count` columns of length `dim`, one after another.
    pub fn from_column_major(dim: usize, count: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || count == 0 {
            return Err(Error::InvalidDimension(format!(
                "data matrix needs d >= 1 and n >= 1, got d = {dim}, n = {count}"
            )));
        }
        if points.len() != dim * count {
            return Err(Error::DimensionMismatch {
                expected: dim * count,
                found: points.len(),
            });
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos % dim,
                col: pos / dim,
            });
        }
        let m = Self { dim, count, points };
        let bad = m.norm_violations();
        if !bad.is_empty() {
            return Err(Error::ColumnNormViolation {
                rows: bad,
                max_norm: m.max_column_norm(),
            });
        }
        Ok(m)
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let dim = columns.first().map_or(0, Vec::len);
        let mut points = Vec::with_capacity(dim * columns.len());
        for c in columns {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.len(),
                });
            }
            points.extend_from_slice(c);
        }
        Self::from_column_major(dim, columns.len(), points)
    }

    /// Like [`from_columns`](Self::from_columns), but when the largest column
    /// norm exceeds 1 every column is divided by it. A single global factor
    /// leaves principal directions unchanged.
    pub fn from_columns_normalized(columns: &[Vec<f64>]) -> Result<Self> {
        let max = columns.iter().map(|c| l2(c)).fold(0.0, f64::max);
        if max > 1.0 && max.is_finite() {
            let scaled: Vec<Vec<f64>> = columns
                .iter()
                .map(|c| c.iter().map(|v| v / max).collect())
                .collect();
            Self::from_columns(&scaled)
        } else {
            Self::from_columns(columns)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn max_column_norm(&self) -> f64 {
        self.columns().map(l2).fold(0.0, f64::max)
    }

    fn norm_violations(&self) -> Vec<usize> {
        self.columns()
            .enumerate()
            .filter(|(_, c)| l2(c) > 1.0 + NORM_TOLERANCE)
            .map(|(i, _)| i)
            .collect()
    }

    /// Copy with column `index` replaced by `point`.
    pub fn with_column(&self, index: usize, point: &[f64]) -> Result<Self> {
        if index >= self.count {
            return Err(Error::param(
                "column index",
                format!("{index} out of range for n = {}", self.count),
            ));
        }
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        let mut points = self.points.clone();
        points[index * self.dim..(index + 1) * self.dim].copy_from_slice(point);
        Self::from_column_major(self.dim, self.count, points)
    }
}

/// Normalization of the released second-moment matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceScaling {
    /// `(1/n) X Xᵀ`.
    Mean,
    /// `X Xᵀ`.
    Gram,
}

impl CovarianceScaling {
    /// Multiplier on `Σ x_i x_iᵀ`, which is also the factor by which every
    /// sensitivity scales.
    pub fn factor(self, n: usize) -> f64 {
        match self {
            CovarianceScaling::Mean => 1.0 / n as f64,
            CovarianceScaling::Gram => 1.0,
        }
    }
}

pub fn covariance(x: &DataMatrix, scaling: CovarianceScaling) -> SymmetricMatrix {
    let d = x.dim();
    let mut acc = vec![0.0; d * (d + 1) / 2];
    for col in x.columns() {
        let mut k = 0;
        for i in 0..d {
            let xi = col[i];
            for &xj in &col[i..] {
                acc[k] += xi * xj;
                k += 1;
            }
        }
    }
    let f = scaling.factor(x.count());
    if f != 1.0 {
        acc.iter_mut().for_each(|v| *v *= f);
    }
    SymmetricMatrix::from_upper_triangle(d, acc).expect("finite data")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_points_outside_unit_ball() {
        let err = DataMatrix::from_columns(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.5]])
            .unwrap_err();
        match err {
            Error::ColumnNormViolation { rows, max_norm } => {
                assert_eq!(rows, vec![1, 2]);
                assert_eq!(max_norm, 2.0);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_empty_and_ragged() {
        assert!(DataMatrix::from_columns(&[]).is_err());
        assert!(DataMatrix::from_columns(&[vec![0.1], vec![0.1, 0.2]]).is_err());
        assert!(DataMatrix::from_columns(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn normalization_rescales_globally() {
        let x = DataMatrix::from_columns_normalized(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(x.column(0), &[1.0, 0.0]);
        assert_eq!(x.column(1), &[0.0, 0.5]);
        let y = DataMatrix::from_columns_normalized(&[vec![0.5, 0.0]]).unwrap();
        assert_eq!(y.column(0), &[0.5, 0.0]);
    }

    #[test]
    fn covariance_examples() {
        let x = DataMatrix::from_columns(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(
            covariance(&x, CovarianceScaling::Mean),
            SymmetricMatrix::from_diagonal(&[0.5, 0.5]).unwrap()
        );
        assert_eq!(
            covariance(&x, CovarianceScaling::Gram),
            SymmetricMatrix::identity(2).unwrap()
        );
        let v = vec![0.6, 0.8];
        let single = DataMatrix::from_columns(std::slice::from_ref(&v)).unwrap();
        assert_eq!(
            covariance(&single, CovarianceScaling::Mean),
            SymmetricMatrix::outer(&v).unwrap()
        );
    }

    #[test]
    fn with_column_replaces_one_point() {
        let x = DataMatrix::from_columns(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let y = x.with_column(1, &[0.5, 0.5]).unwrap();
        assert_eq!(y.column(0), x.column(0));
        assert_eq!(y.column(1), &[0.5, 0.5]);
        assert!(x.with_column(2, &[0.0, 0.0]).is_err());
        assert!(x.with_column(0, &[1.0, 1.0]).is_err());
    }
}
