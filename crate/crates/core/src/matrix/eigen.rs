//! Cyclic Jacobi eigensolver for symmetric matrices.
//!
//! Each sweep visits every off-diagonal pair `(p, q)` once and applies the
//! plane rotation that annihilates it. Iteration stops when the off-diagonal
//! Frobenius mass falls below `1e-12 * ‖A‖_F`.

use super::{Matrix, SymmetricMatrix};
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;
pub const CONVERGENCE_TOLERANCE: f64 = 1e-12;

/// Eigenvalues sorted in descending order, with the matching orthonormal
/// eigenvectors stored as the columns of `eigenvectors`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `Σ_{i<k} λ_i v_i v_iᵀ`.
    pub fn partial_reconstruction(&self, k: usize) -> SymmetricMatrix {
        let v = &self.eigenvectors;
        let k = k.min(self.dim());
        SymmetricMatrix::from_fn(self.dim(), |i, j| {
            (0..k)
                .map(|l| self.eigenvalues[l] * v.get(i, l) * v.get(j, l))
                .sum()
        })
        .expect("finite decomposition")
    }

    pub fn reconstruct(&self) -> SymmetricMatrix {
        self.partial_reconstruction(self.dim())
    }

    /// `‖VᵀV − I‖_F`.
    pub fn orthogonality_residual(&self) -> f64 {
        let v = &self.eigenvectors;
        let d = self.dim();
        let mut sum = 0.0;
        for a in 0..d {
            for b in 0..d {
                let dot: f64 = (0..d).map(|i| v.get(i, a) * v.get(i, b)).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                sum += (dot - target).powi(2);
            }
        }
        sum.sqrt()
    }

    /// `‖A − VΛVᵀ‖_F`.
    pub fn reconstruction_residual(&self, source: &SymmetricMatrix) -> f64 {
        super::frobenius_norm(&source.sub(&self.reconstruct()).expect("same dimension"))
    }
}

struct Jacobi {
    d: usize,
    a: Vec<f64>,
    v: Option<Vec<f64>>,
}

impl Jacobi {
    fn new(source: &SymmetricMatrix, with_vectors: bool) -> Self {
        let d = source.dim();
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] = source.get(i, j);
            }
        }
        let v = with_vectors.then(|| {
            let mut v = vec![0.0; d * d];
            for i in 0..d {
                v[i * d + i] = 1.0;
            }
            v
        });
        Self { d, a, v }
    }

    fn off_diagonal_norm(&self) -> f64 {
        let d = self.d;
        let mut sum = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                sum += self.a[p * d + q].powi(2);
            }
        }
        (2.0 * sum).sqrt()
    }

    fn rotate(&mut self, p: usize, q: usize) {
        let d = self.d;
        let apq = self.a[p * d + q];
        if apq == 0.0 {
            return;
        }
        let app = self.a[p * d + p];
        let aqq = self.a[q * d + q];
        let theta = (aqq - app) / (2.0 * apq);
        let t = if theta.abs() > 1e150 {
            0.5 / theta
        } else {
            theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
        };
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;

        for r in 0..d {
            if r == p || r == q {
                continue;
            }
            let arp = self.a[r * d + p];
            let arq = self.a[r * d + q];
            let new_rp = c * arp - s * arq;
            let new_rq = s * arp + c * arq;
            self.a[r * d + p] = new_rp;
            self.a[p * d + r] = new_rp;
            self.a[r * d + q] = new_rq;
            self.a[q * d + r] = new_rq;
        }
        self.a[p * d + p] = app - t * apq;
        self.a[q * d + q] = aqq + t * apq;
        self.a[p * d + q] = 0.0;
        self.a[q * d + p] = 0.0;

        if let Some(v) = self.v.as_mut() {
            for r in 0..d {
                let vrp = v[r * d + p];
                let vrq = v[r * d + q];
                v[r * d + p] = c * vrp - s * vrq;
                v[r * d + q] = s * vrp + c * vrq;
            }
        }
    }

    fn run(&mut self, scale: f64) -> Result<()> {
        let tol = CONVERGENCE_TOLERANCE * scale;
        for _ in 0..MAX_SWEEPS {
            if self.off_diagonal_norm() <= tol {
                return Ok(());
            }
            for p in 0..self.d {
                for q in (p + 1)..self.d {
                    self.rotate(p, q);
                }
            }
        }
        let residual = self.off_diagonal_norm();
        if residual <= tol {
            Ok(())
        } else {
            Err(Error::NoConvergence {
                sweeps: MAX_SWEEPS,
                residual,
            })
        }
    }

    /// Indices of the diagonal, largest eigenvalue first.
    fn descending_order(&self) -> Vec<usize> {
        let d = self.d;
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| self.a[j * d + j].total_cmp(&self.a[i * d + i]));
        order
    }
}

fn check_finite(a: &SymmetricMatrix) -> Result<()> {
    for i in 0..a.dim() {
        for j in i..a.dim() {
            if !a.get(i, j).is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Full symmetric eigendecomposition.
pub fn eig_sym(a: &SymmetricMatrix) -> Result<EigenDecomposition> {
    check_finite(a)?;
    let mut jacobi = Jacobi::new(a, true);
    jacobi.run(super::frobenius_norm(a))?;
    let d = jacobi.d;
    let order = jacobi.descending_order();
    let eigenvalues = order.iter().map(|&i| jacobi.a[i * d + i]).collect();
    let v = jacobi.v.expect("vectors requested");
    let eigenvectors = Matrix::from_fn(d, d, |r, c| v[r * d + order[c]]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, descending. Same iteration as [`eig_sym`] without
/// accumulating the rotations.
pub fn eigenvalues_sym(a: &SymmetricMatrix) -> Result<Vec<f64>> {
    check_finite(a)?;
    let mut jacobi = Jacobi::new(a, false);
    jacobi.run(super::frobenius_norm(a))?;
    let d = jacobi.d;
    Ok(jacobi
        .descending_order()
        .into_iter()
        .map(|i| jacobi.a[i * d + i])
        .collect())
}

/// Lower-triangular `L` with `A = L Lᵀ`.
pub fn cholesky(a: &SymmetricMatrix) -> Result<Matrix> {
    let d = a.dim();
    let mut l = Matrix::zeros(d, d);
    for j in 0..d {
        let mut diag = a.get(j, j);
        for k in 0..j {
            diag -= l.get(j, k).powi(2);
        }
        if !(diag > 0.0) {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: diag,
            });
        }
        let ljj = diag.sqrt();
        l.set(j, j, ljj);
        for i in (j + 1)..d {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / ljj);
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix with non-zero diagonal.
pub fn invert_lower_triangular(l: &Matrix) -> Matrix {
    let d = l.rows();
    let mut inv = Matrix::zeros(d, d);
    for j in 0..d {
        inv.set(j, j, 1.0 / l.get(j, j));
        for i in (j + 1)..d {
            let s: f64 = (j..i).map(|k| l.get(i, k) * inv.get(k, j)).sum();
            inv.set(i, j, -s / l.get(i, i));
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input_is_returned_sorted_with_identity_vectors() {
        let a = SymmetricMatrix::from_diagonal(&[3.0, 2.0, 1.0]).unwrap();
        let e = eig_sym(&a).unwrap();
        assert_eq!(e.eigenvalues(), &[3.0, 2.0, 1.0]);
        assert_eq!(e.eigenvectors(), &Matrix::identity(3));
    }

    #[test]
    fn two_by_two_closed_form() {
        let a = SymmetricMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = eig_sym(&a).unwrap();
        assert!((e.eigenvalues()[0] - 3.0).abs() < 1e-14);
        assert!((e.eigenvalues()[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.eigenvector(0);
        let v1 = e.eigenvector(1);
        // sign is arbitrary
        assert!((v0[0].abs() - h).abs() < 1e-14 && (v0[0] - v0[1]).abs() < 1e-14);
        assert!((v1[0].abs() - h).abs() < 1e-14 && (v1[0] + v1[1]).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix_converges_immediately() {
        let a = SymmetricMatrix::zeros(4).unwrap();
        let e = eig_sym(&a).unwrap();
        assert!(e.eigenvalues().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn eigenvalues_only_matches_full() {
        let a = SymmetricMatrix::from_fn(5, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0).unwrap();
        let full = eig_sym(&a).unwrap();
        let vals = eigenvalues_sym(&a).unwrap();
        for (x, y) in full.eigenvalues().iter().zip(&vals) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_round_trip() {
        let a = SymmetricMatrix::from_rows(&[
            vec![4.0, 2.0, 0.4],
            vec![2.0, 5.0, 1.0],
            vec![0.4, 1.0, 3.0],
        ])
        .unwrap();
        let l = cholesky(&a).unwrap();
        let back = SymmetricMatrix::gram(&l).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-14);
        let inv = invert_lower_triangular(&l);
        let prod = l.matmul(&inv).unwrap();
        assert!(prod
            .as_slice()
            .iter()
            .zip(Matrix::identity(3).as_slice())
            .all(|(x, y)| (x - y).abs() < 1e-14));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = SymmetricMatrix::from_diagonal(&[1.0, -1.0]).unwrap();
        assert!(matches!(
            cholesky(&a),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
    }
}
