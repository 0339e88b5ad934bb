use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::projector::{projector_distance, Projector};
use crate::error::{Error, Result};
use crate::matrix::{eig_sym, eigenvalues_sym};
use crate::mechanisms::{covariance, wishart_noise_params, CovarianceScaling, DataMatrix};
use crate::sampling::{sample_wishart, RngStream};

/// Slack on the per-trial subspace inequalities.
pub const SUBSPACE_TOLERANCE: f64 = 1e-8;
/// Relative slack on the Weyl sandwich.
pub const WEYL_TOLERANCE: f64 = 1e-10;
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

/// One Wishart-mechanism trial of top-`k` subspace recovery.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceClosenessResult {
    pub trial: u64,
    pub k: usize,
    /// `σ_k(A) − σ_{k+1}(A)`.
    pub gap: f64,
    /// `‖W‖₂`.
    pub noise_norm: f64,
    /// `‖V_k V_kᵀ − V̂_k V̂_kᵀ‖_F`.
    pub projector_distance_f: f64,
    pub projector_distance_2: f64,
    /// `2√k ‖W‖₂ / gap`.
    pub bound: f64,
    /// `gap ≥ 2‖W‖₂`.
    pub gap_condition_met: bool,
    /// `None` when the gap condition fails.
    pub bound_holds: Option<bool>,
    /// `σ_k(A) − σ_{k+1}(A + W)`.
    pub davis_kahan_denominator: f64,
    /// `‖P_k − P̂_k‖₂ ≤ ‖W‖₂ / denominator`, or `None` if the denominator is
    /// not positive.
    pub davis_kahan_holds: Option<bool>,
    /// `λ_i(A) + λ_min(W) ≤ λ_i(A + W) ≤ λ_i(A) + λ_max(W)` for every `i`.
    pub weyl_holds: bool,
    /// `|‖v₁v₁ᵀ − v̂₁v̂₁ᵀ‖_F² + 2⟨v₁, v̂₁⟩² − 2|`, for `k = 1` only.
    pub k1_identity_residual: Option<f64>,
}

/// Releases `A = (1/n) X Xᵀ` with the Wishart mechanism `trials` times and
/// compares top-`k` subspaces. Trial `t` uses `rng.substream(t)`.
pub fn subspace_closeness_audit(
    x: &DataMatrix,
    k: usize,
    epsilon: f64,
    trials: usize,
    rng: &RngStream,
) -> Result<Vec<SubspaceClosenessResult>> {
    let d = x.dim();
    if k == 0 || k > d {
        return Err(Error::param("k", format!("must be in 1..={d}, got {k}")));
    }
    let a = covariance(x, CovarianceScaling::Mean);
    let params = wishart_noise_params(d, x.count(), epsilon, CovarianceScaling::Mean)?;
    let eig_a = eig_sym(&a)?;
    let lam = eig_a.eigenvalues().to_vec();
    let p = Projector::from_decomposition(&eig_a, k)?;
    let gap = lam[k - 1] - lam.get(k).copied().unwrap_or(0.0);

    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let w = sample_wishart(&mut rng.substream(t), &params)?;
            let a_hat = a.add(&w)?;
            let eig_hat = eig_sym(&a_hat)?;
            let p_hat = Projector::from_decomposition(&eig_hat, k)?;
            let dist = projector_distance(&p, &p_hat)?;

            let w_eig = eigenvalues_sym(&w)?;
            let (w_max, w_min) = (w_eig[0], w_eig[d - 1]);
            let noise_norm = w_max.abs().max(w_min.abs());

            let bound = 2.0 * (k as f64).sqrt() * noise_norm / gap;
            let gap_condition_met = gap >= 2.0 * noise_norm;
            let bound_holds =
                gap_condition_met.then_some(dist.frobenius <= bound + SUBSPACE_TOLERANCE);

            let lam_hat = eig_hat.eigenvalues();
            let davis_kahan_denominator = match lam_hat.get(k) {
                Some(next) => lam[k - 1] - next,
                None => f64::INFINITY,
            };
            let davis_kahan_holds = (davis_kahan_denominator > 0.0).then(|| {
                dist.spectral <= noise_norm / davis_kahan_denominator + SUBSPACE_TOLERANCE
            });

            let tol = WEYL_TOLERANCE * (1.0 + lam[0].abs() + noise_norm);
            let weyl_holds = lam
                .iter()
                .zip(lam_hat)
                .all(|(l, lh)| l + w_min - tol <= *lh && *lh <= l + w_max + tol);

            let k1_identity_residual = (k == 1).then(|| {
                let v1 = eig_a.eigenvector(0);
                let v1_hat = eig_hat.eigenvector(0);
                let dot: f64 = v1.iter().zip(&v1_hat).map(|(a, b)| a * b).sum();
                (dist.frobenius.powi(2) + 2.0 * dot * dot - 2.0).abs()
            });

            Ok(SubspaceClosenessResult {
                trial: t,
                k,
                gap,
                noise_norm,
                projector_distance_f: dist.frobenius,
                projector_distance_2: dist.spectral,
                bound,
                gap_condition_met,
                bound_holds,
                davis_kahan_denominator,
                davis_kahan_holds,
                weyl_holds,
                k1_identity_residual,
            })
        })
        .collect()
}
