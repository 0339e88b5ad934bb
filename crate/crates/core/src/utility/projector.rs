use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{eig_sym, frobenius_norm, spectral_norm, EigenDecomposition, SymmetricMatrix};

/// Loose enough for projectors assembled from Jacobi eigenvectors.
pub const PROJECTOR_TOLERANCE: f64 = 1e-8;

/// Orthogonal projector `V_k V_kᵀ` onto a `k`-dimensional subspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Projector {
    rank: usize,
    matrix: SymmetricMatrix,
}

impl Projector {
    /// Projector onto the eigenvectors of the `k` largest eigenvalues.
    pub fn from_decomposition(e: &EigenDecomposition, k: usize) -> Result<Self> {
        let d = e.dim();
        if k == 0 || k > d {
            return Err(Error::param("k", format!("must be in 1..={d}, got {k}")));
        }
        let v = e.eigenvectors();
        let matrix =
            SymmetricMatrix::from_fn(d, |i, j| (0..k).map(|l| v.get(i, l) * v.get(j, l)).sum())?;
        Ok(Self { rank: k, matrix })
    }

    /// Validates symmetry (by type), idempotence and integral trace.
    pub fn from_matrix(matrix: SymmetricMatrix) -> Result<Self> {
        let trace = matrix.trace();
        let rank = trace.round();
        if (trace - rank).abs() > PROJECTOR_TOLERANCE || rank < 1.0 {
            return Err(Error::param(
                "projector",
                format!("trace {trace} is not a positive integer"),
            ));
        }
        let p = Self {
            rank: rank as usize,
            matrix,
        };
        let r = p.idempotence_residual();
        if r > PROJECTOR_TOLERANCE {
            return Err(Error::param("projector", format!("‖P² − P‖_F = {r:e}")));
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `‖P² − P‖_F`.
    pub fn idempotence_residual(&self) -> f64 {
        let d = self.dim();
        let dense = self.matrix.to_dense();
        let sq = dense.matmul(&dense).expect("square");
        let mut sum = 0.0;
        for i in 0..d {
            for j in 0..d {
                sum += (sq.get(i, j) - dense.get(i, j)).powi(2);
            }
        }
        sum.sqrt()
    }
}

/// Projector onto the top-`k` eigenspace of `a`.
pub fn top_k_subspace(a: &SymmetricMatrix, k: usize) -> Result<Projector> {
    Projector::from_decomposition(&eig_sym(a)?, k)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectorDistance {
    pub frobenius: f64,
    pub spectral: f64,
}

pub fn projector_distance(p: &Projector, q: &Projector) -> Result<ProjectorDistance> {
    // Fix the subtraction order so swapping the arguments is bitwise neutral.
    let key = |m: &SymmetricMatrix| {
        m.upper_triangle()
            .iter()
            .map(|v| v.to_bits())
            .collect::<Vec<_>>()
    };
    let (a, b) = if key(&p.matrix) >= key(&q.matrix) {
        (p, q)
    } else {
        (q, p)
    };
    let diff = a.matrix.sub(&b.matrix)?;
    Ok(ProjectorDistance {
        frobenius: frobenius_norm(&diff),
        spectral: spectral_norm(&diff)?,
    })
}
