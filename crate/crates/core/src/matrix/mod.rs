//! Dense symmetric matrices, norms, the Jacobi eigensolver and the plain-text
//! matrix format.

mod dense;
mod eigen;
mod symmetric;
mod text;

pub use dense::Matrix;
pub use eigen::{
    cholesky, eig_sym, eigenvalues_sym, invert_lower_triangular, EigenDecomposition,
    CONVERGENCE_TOLERANCE, MAX_SWEEPS,
};
pub use symmetric::{SymmetricMatrix, SYMMETRY_TOLERANCE};
pub use text::{format_matrix_text, parse_matrix_text, read_matrix_file, write_matrix_file};

use crate::error::{Error, Result};

/// `max_i |λ_i|`, which for a symmetric matrix is the largest singular value.
pub fn spectral_norm(a: &SymmetricMatrix) -> Result<f64> {
    let vals = eigenvalues_sym(a)?;
    Ok(vals[0].abs().max(vals[vals.len() - 1].abs()))
}

/// `Σ_i |λ_i|`.
pub fn nuclear_norm(a: &SymmetricMatrix) -> Result<f64> {
    Ok(eigenvalues_sym(a)?.iter().map(|v| v.abs()).sum())
}

/// `Σ_{i,j} |A_ij|` over the full square.
pub fn l11_norm(a: &SymmetricMatrix) -> f64 {
    let d = a.dim();
    let mut sum = 0.0;
    for i in 0..d {
        sum += a.get(i, i).abs();
        for j in (i + 1)..d {
            sum += 2.0 * a.get(i, j).abs();
        }
    }
    sum
}

pub fn frobenius_norm(a: &SymmetricMatrix) -> f64 {
    let d = a.dim();
    let mut sum = 0.0;
    for i in 0..d {
        sum += a.get(i, i).powi(2);
        for j in (i + 1)..d {
            sum += 2.0 * a.get(i, j).powi(2);
        }
    }
    sum.sqrt()
}

/// `V_k Λ_k V_kᵀ` over the `k` algebraically largest eigenvalues.
///
/// For positive semidefinite input this is the best rank-`k` approximation in
/// spectral and Frobenius norm. For indefinite input a large negative
/// eigenvalue is discarded even when it dominates in magnitude; callers that
/// care should check [`EigenDecomposition::min_eigenvalue`].
pub fn rank_k_truncation(e: &EigenDecomposition, k: usize) -> Result<SymmetricMatrix> {
    if k == 0 || k > e.dim() {
        return Err(Error::param(
            "k",
            format!("must be in 1..={}, got {k}", e.dim()),
        ));
    }
    Ok(e.partial_reconstruction(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> SymmetricMatrix {
        SymmetricMatrix::from_diagonal(v).unwrap()
    }

    #[test]
    fn spectral_norm_examples() {
        assert_eq!(spectral_norm(&diag(&[1.0, -4.0, 2.0])).unwrap(), 4.0);
        assert_eq!(
            spectral_norm(&SymmetricMatrix::zeros(3).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn nuclear_norm_examples() {
        assert_eq!(nuclear_norm(&diag(&[1.0, -2.0, 3.0])).unwrap(), 6.0);
        let v = [0.6, 0.0, 0.8];
        let r1 = SymmetricMatrix::outer(&v).unwrap();
        assert!((nuclear_norm(&r1).unwrap() - 1.0).abs() < 1e-14);
        let delta = diag(&[0.1, -0.1, 0.0]);
        assert!((nuclear_norm(&delta).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn l11_norm_examples() {
        let a = SymmetricMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert_eq!(l11_norm(&a), 4.0);
        assert_eq!(l11_norm(&SymmetricMatrix::zeros(2).unwrap()), 0.0);
        let v = [0.5; 4];
        assert!((l11_norm(&SymmetricMatrix::outer(&v).unwrap()) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn frobenius_norm_examples() {
        assert!(
            (frobenius_norm(&SymmetricMatrix::identity(3).unwrap()) - 3f64.sqrt()).abs() < 1e-15
        );
        assert_eq!(frobenius_norm(&SymmetricMatrix::zeros(3).unwrap()), 0.0);
    }

    #[test]
    fn truncation_keeps_top_k() {
        let e = eig_sym(&diag(&[3.0, 2.0, 1.0])).unwrap();
        assert_eq!(rank_k_truncation(&e, 2).unwrap(), diag(&[3.0, 2.0, 0.0]));
        assert_eq!(rank_k_truncation(&e, 3).unwrap(), diag(&[3.0, 2.0, 1.0]));
        assert!(rank_k_truncation(&e, 0).is_err());
        assert!(rank_k_truncation(&e, 4).is_err());
    }

    #[test]
    fn truncation_is_signed_on_indefinite_input() {
        let e = eig_sym(&diag(&[5.0, -4.0, 1.0])).unwrap();
        assert_eq!(rank_k_truncation(&e, 1).unwrap(), diag(&[5.0, 0.0, 0.0]));
        // -5 dominates in magnitude but is still discarded
        let e = eig_sym(&diag(&[1.0, -5.0])).unwrap();
        assert_eq!(rank_k_truncation(&e, 1).unwrap(), diag(&[1.0, 0.0]));
    }
}
