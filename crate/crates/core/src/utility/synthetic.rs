use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mechanisms::DataMatrix;
use crate::sampling::RngStream;

/// Haar-random orthogonal matrix: Gram–Schmidt on a Gaussian matrix, with
/// column signs fixed by the diagonal of `R`.
pub fn random_orthogonal(d: usize, rng: &mut RngStream) -> Matrix {
    let mut cols: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    for j in 0..d {
        for i in 0..j {
            let dot: f64 = (0..d).map(|r| cols[i][r] * cols[j][r]).sum();
            for r in 0..d {
                cols[j][r] -= dot * cols[i][r];
            }
        }
        let norm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|x| *x /= norm);
    }
    Matrix::from_fn(d, d, |r, c| cols[c][r])
}

/// `n` points whose population covariance is `diag(spectrum)` (optionally
/// rotated by a random orthogonal matrix).
///
/// Coordinate `i` of each point is `±√λ_i` with a fair sign, so every point
/// has squared norm exactly `Σλ_i`, which must be at most 1.
pub fn synthetic_dataset(
    spectrum: &[f64],
    n: usize,
    rng: &mut RngStream,
    rotate: bool,
) -> Result<DataMatrix> {
    let d = spectrum.len();
    if d == 0 || n == 0 {
        return Err(Error::InvalidDimension(format!(
            "need d, n >= 1, got d = {d}, n = {n}"
        )));
    }
    if spectrum.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
        return Err(Error::param(
            "spectrum",
            "entries must be finite and non-negative",
        ));
    }
    let total: f64 = spectrum.iter().sum();
    if total > 1.0 {
        return Err(Error::param("spectrum", format!("sum {total} exceeds 1")));
    }
    let roots: Vec<f64> = spectrum.iter().map(|l| l.sqrt()).collect();
    let q = rotate.then(|| random_orthogonal(d, rng));
    let mut points = Vec::with_capacity(d * n);
    for _ in 0..n {
        let x: Vec<f64> = roots
            .iter()
            .map(|r| if rng.random::<bool>() { *r } else { -r })
            .collect();
        match &q {
            Some(q) => {
                points.extend((0..d).map(|i| (0..d).map(|j| q.get(i, j) * x[j]).sum::<f64>()))
            }
            None => points.extend(x),
        }
    }
    DataMatrix::from_column_major(d, n, points)
}
