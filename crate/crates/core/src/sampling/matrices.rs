use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

use super::{sample_gamma, Laplace, RngStream};
use crate::error::{Error, Result};
use crate::matrix::{cholesky, eigenvalues_sym, invert_lower_triangular, Matrix, SymmetricMatrix};

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidDimension(
            "dimension must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Symmetric matrix whose upper triangle (diagonal included) holds
/// `(d² + d)/2` i.i.d. `Lap(0, scale)` draws, mirrored into the lower triangle.
/// Draws fill the upper triangle row by row.
pub fn sample_symmetric_laplace_matrix(
    rng: &mut RngStream,
    d: usize,
    scale: f64,
) -> Result<SymmetricMatrix> {
    check_dim(d)?;
    let lap = Laplace::new(scale)?;
    let upper = (0..d * (d + 1) / 2).map(|_| lap.sample(rng)).collect();
    SymmetricMatrix::from_upper_triangle(d, upper)
}

/// Same layout as [`sample_symmetric_laplace_matrix`] with `N(0, σ²)` entries.
pub fn sample_symmetric_gaussian_matrix(
    rng: &mut RngStream,
    d: usize,
    sigma: f64,
) -> Result<SymmetricMatrix> {
    check_dim(d)?;
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::param(
            "Gaussian sigma",
            format!("must be non-negative, got {sigma}"),
        ));
    }
    let upper = (0..d * (d + 1) / 2)
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    SymmetricMatrix::from_upper_triangle(d, upper)
}

#[derive(Clone, Debug)]
pub enum WishartScale {
    /// `C = c I`.
    Isotropic(f64),
    /// Arbitrary positive definite `C` with its Cholesky factor.
    General {
        matrix: SymmetricMatrix,
        factor: Matrix,
    },
}

/// Parameters of `W_d(m, C)`.
#[derive(Clone, Debug)]
pub struct WishartParams {
    dim: usize,
    dof: f64,
    scale: WishartScale,
}

impl WishartParams {
    pub fn isotropic(dim: usize, dof: f64, scale_eigenvalue: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(scale_eigenvalue > 0.0 && scale_eigenvalue.is_finite()) {
            return Err(Error::param(
                "Wishart scale",
                format!("must be positive, got {scale_eigenvalue}"),
            ));
        }
        Self::check_dof(dim, dof)?;
        Ok(Self {
            dim,
            dof,
            scale: WishartScale::Isotropic(scale_eigenvalue),
        })
    }

    pub fn with_scale_matrix(dof: f64, scale: SymmetricMatrix) -> Result<Self> {
        let dim = scale.dim();
        Self::check_dof(dim, dof)?;
        let factor = cholesky(&scale)?;
        Ok(Self {
            dim,
            dof,
            scale: WishartScale::General {
                matrix: scale,
                factor,
            },
        })
    }

    fn check_dof(dim: usize, dof: f64) -> Result<()> {
        if !(dof > dim as f64 - 1.0 && dof.is_finite()) {
            return Err(Error::param(
                "Wishart degrees of freedom",
                format!("must exceed d - 1 = {}, got {dof}", dim as f64 - 1.0),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    pub fn scale(&self) -> &WishartScale {
        &self.scale
    }

    /// `c` for isotropic scale, `None` otherwise.
    pub fn scale_eigenvalue(&self) -> Option<f64> {
        match self.scale {
            WishartScale::Isotropic(c) => Some(c),
            WishartScale::General { .. } => None,
        }
    }

    pub fn scale_matrix(&self) -> SymmetricMatrix {
        match &self.scale {
            WishartScale::Isotropic(c) => {
                SymmetricMatrix::from_diagonal(&vec![*c; self.dim]).expect("valid dim")
            }
            WishartScale::General { matrix, .. } => matrix.clone(),
        }
    }

    /// `λ₁(C)`.
    pub fn largest_scale_eigenvalue(&self) -> Result<f64> {
        match &self.scale {
            WishartScale::Isotropic(c) => Ok(*c),
            WishartScale::General { matrix, .. } => Ok(eigenvalues_sym(matrix)?[0]),
        }
    }

    /// Effective rank `tr(C) / ‖C‖₂`; equals `d` for isotropic scale.
    pub fn effective_rank(&self) -> Result<f64> {
        match &self.scale {
            WishartScale::Isotropic(_) => Ok(self.dim as f64),
            WishartScale::General { matrix, .. } => {
                Ok(matrix.trace() / self.largest_scale_eigenvalue()?)
            }
        }
    }
}

/// Draws `W ~ W_d(m, C)` with the Bartlett decomposition.
///
/// `T` is lower triangular with `T_ii = sqrt(χ²_{m-i})` (0-based `i`) and
/// standard normal entries below the diagonal; `W = L T Tᵀ Lᵀ` where `L` is
/// the Cholesky factor of `C` (`√c I` when isotropic). Entries of `T` are drawn
/// row by row, below-diagonal entries before the diagonal one.
pub fn sample_wishart(rng: &mut RngStream, params: &WishartParams) -> Result<SymmetricMatrix> {
    let d = params.dim;
    let mut t = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..i {
            t.set(i, j, rng.sample::<f64, _>(StandardNormal));
        }
        // chi-square with m - i dof is Gamma((m - i)/2, 2)
        let chi2 = sample_gamma(rng, 0.5 * (params.dof - i as f64), 2.0)?;
        t.set(i, i, chi2.sqrt());
    }
    let inner = SymmetricMatrix::gram(&t)?;
    match &params.scale {
        WishartScale::Isotropic(c) => Ok(inner.scale(*c)),
        WishartScale::General { factor, .. } => inner.congruence(factor),
    }
}

/// `ln Γ_d(a)`.
fn ln_multivariate_gamma(d: usize, a: f64) -> f64 {
    let df = d as f64;
    df * (df - 1.0) / 4.0 * std::f64::consts::PI.ln()
        + (1..=d)
            .map(|j| ln_gamma(a + (1.0 - j as f64) / 2.0))
            .sum::<f64>()
}

/// Log density of `W_d(m, C)` at `W`. Fails with
/// [`Error::SupportViolation`] when `W` is not positive definite.
pub fn wishart_log_density(w: &SymmetricMatrix, params: &WishartParams) -> Result<f64> {
    if w.dim() != params.dim {
        return Err(Error::DimensionMismatch {
            expected: params.dim,
            found: w.dim(),
        });
    }
    let eig = eigenvalues_sym(w)?;
    let min = eig[eig.len() - 1];
    if !(min > 0.0) {
        return Err(Error::SupportViolation {
            min_eigenvalue: min,
        });
    }
    let d = params.dim as f64;
    let m = params.dof;
    let ln_det_w: f64 = eig.iter().map(|v| v.ln()).sum();
    let (ln_det_c, trace_term) = match &params.scale {
        WishartScale::Isotropic(c) => (d * c.ln(), w.trace() / c),
        WishartScale::General { factor, .. } => {
            let ln_det = 2.0 * (0..params.dim).map(|i| factor.get(i, i).ln()).sum::<f64>();
            // tr(C⁻¹W) = tr(L⁻¹ W L⁻ᵀ)
            let linv = invert_lower_triangular(factor);
            (ln_det, w.congruence(&linv)?.trace())
        }
    };
    Ok(0.5 * (m - d - 1.0) * ln_det_w
        - 0.5 * m * d * std::f64::consts::LN_2
        - 0.5 * m * ln_det_c
        - ln_multivariate_gamma(params.dim, 0.5 * m)
        - 0.5 * trace_term)
}
